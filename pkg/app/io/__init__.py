# IO package initialization
