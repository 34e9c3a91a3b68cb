#!/usr/bin/env python3
"""
Main entry point for the pano360 toolkit.
Run with: python main.py <command> [options]  (same as the `pano360` script)
"""
import sys

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
