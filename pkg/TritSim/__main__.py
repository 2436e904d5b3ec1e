from TritSim.cli import main

main()
