"""Command-line harness: fit, sweep, table, gradcheck, audio, report."""
