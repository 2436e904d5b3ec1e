# Makes the TritSim package importable from TritSimTest/ and SimService/.
