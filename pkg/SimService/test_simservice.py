# test_simservice.py
import pytest
from simservice import app


@pytest.fixture
def client():
    """Create a Flask test client."""
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


BUFFER_NOT_TEXT = """\
.supply 0.9
.subckt INV IN OUT
M1 OUT IN VDD P (19,0)
M2 OUT IN GND N (19,0)
.ends
.top INV
"""


def test_list_cells(client):
    response = client.get('/cells')
    assert response.status_code == 200, response.get_data(as_text=True)
    names = [cell["name"] for cell in response.get_json()["cells"]]
    assert names == ["sti", "pti", "nti", "buffer_not", "and_nand", "or_nor", "addsub2", "alu1", "alu2"]


def test_truth_buffer_not(client):
    response = client.get('/truth/buffer_not')
    assert response.status_code == 200, response.get_data(as_text=True)
    rows = response.get_json()["rows"]
    assert len(rows) == 9
    outputs = {(r["inputs"]["S"], r["inputs"]["IN"]): r["outputs"]["OUT"] for r in rows}
    assert outputs[("0", "1")] == "1"
    assert outputs[("1", "2")] == "Z"
    assert outputs[("2", "0")] == "2"


def test_truth_unknown_cell(client):
    response = client.get('/truth/xor')
    assert response.status_code == 404
    assert "error" in response.get_json()


def test_truth_bad_vdd(client):
    response = client.get('/truth/sti?vdd=abc')
    assert response.status_code == 400


def test_check_and_nand_at_low_supply(client):
    response = client.get('/check/and_nand?vdd=0.8')
    assert response.status_code == 200
    data = response.get_json()
    assert data["passed"] is True
    assert data["rows"] == 27
    assert data["mismatches"] == []


def test_power_buffer_not_hz_rows_are_quiet(client):
    response = client.get('/power/buffer_not')
    assert response.status_code == 200
    for row in response.get_json()["rows"]:
        if row["inputs"]["S"] == "1":
            assert row["paths"] == 0
        if row["outputs"]["OUT"] == "1":
            assert row["paths"] >= 1


def test_alu_not_row(client):
    payload = {"s0": 2, "s1": 0, "a": 1, "b": 0, "cin": 0, "design": "2"}
    response = client.post('/alu', json=payload)
    assert response.status_code == 200, response.get_data(as_text=True)
    data = response.get_json()
    assert data["operation"] == "not"
    assert data["out"] == "1"
    assert data["cout"] == "Z"


def test_alu_designs_agree_on_subtract(client):
    answers = set()
    for design in ("1", "2", "behavioral"):
        payload = {"s0": 1, "s1": 2, "a": 2, "b": 1, "cin": 0, "design": design}
        data = client.post('/alu', json=payload).get_json()
        answers.add((data["out"], data["cout"]))
    assert answers == {("2", "0")}


def test_alu_missing_fields(client):
    response = client.post('/alu', json={"s0": 1})
    assert response.status_code == 400
    assert "error" in response.get_json()


def test_alu_invalid_trit(client):
    response = client.post('/alu', json={"s0": 3, "s1": 0, "a": 0, "b": 0, "cin": 0})
    assert response.status_code == 400


def test_parse_netlist(client):
    response = client.post('/parse', json={"text": BUFFER_NOT_TEXT})
    assert response.status_code == 200, response.get_data(as_text=True)
    data = response.get_json()
    assert data["top"] == "INV"
    assert data["inputs"] == ["IN"]
    assert data["outputs"] == ["OUT"]
    assert data["devices"] == 2
    assert data["diagnostics"] == []


def test_parse_metallic_tube(client):
    text = BUFFER_NOT_TEXT.replace("M2 OUT IN GND N (19,0)", "M2 OUT IN GND N (9,0)")
    response = client.post('/parse', json={"text": text})
    assert response.status_code == 400
    data = response.get_json()
    assert "metallic nanotube" in data["error"]
    assert data["line"] == 4
    assert data["column"] == 17


def test_parse_missing_text(client):
    response = client.post('/parse', json={})
    assert response.status_code == 400
