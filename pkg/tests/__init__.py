# cm2 tests
