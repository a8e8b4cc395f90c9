# Makes tests importable for unittest discovery.
