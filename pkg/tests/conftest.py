def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full desk-scale runs; deselect with -m 'not slow'")
