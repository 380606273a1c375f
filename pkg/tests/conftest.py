def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
