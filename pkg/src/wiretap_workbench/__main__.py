#!/usr/bin/env python3
"""
Entry point for the wiretap workbench when run as a module.
"""

if __name__ == "__main__":
    import sys

    from .cli import main

    sys.exit(main())
