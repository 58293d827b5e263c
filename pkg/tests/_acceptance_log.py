"""Collects the one-line verdicts printed by the acceptance suite."""

LINES = []


def record(criterion, passed, detail):
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} | {detail}"
    LINES.append(line)
    print(line, flush=True)
    return passed
