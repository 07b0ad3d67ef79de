#!/usr/bin/env python3
"""
Entry point for the signal-sched command line.
"""

if __name__ == "__main__":
    from signal_sched.main import app

    app()
