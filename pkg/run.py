#!/usr/bin/env python3
import argparse
import logging
import subprocess
import sys

from bootstrap import setup_environment
from config import LOG_CONFIG


def check_dependencies():
    """
    Checks if required dependencies are installed

    Returns:
        bool: True if all dependencies are installed, False otherwise
    """
    try:
        import numpy  # noqa: F401
        import scipy  # noqa: F401
        import pandas  # noqa: F401
        import plotly  # noqa: F401
        import dotenv  # noqa: F401
        import sympy  # noqa: F401
        return True
    except ImportError as e:
        print(f"Missing dependency: {e.name}")
        return False


def install_dependencies():
    """
    Installs required dependencies

    Returns:
        bool: True if installation successful, False otherwise
    """
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
        return True
    except subprocess.CalledProcessError:
        return False


def run_app(argv, debug=False):
    """
    Runs the command line with the remaining arguments

    Args:
        argv (list): Arguments for app.main
        debug (bool): Whether to log at DEBUG level

    Returns:
        int: Exit code
    """
    from app import main

    if debug and "--log-level" not in argv:
        argv = argv + ["--log-level", "DEBUG"]
    return main(argv)


def build_launcher():
    parser = argparse.ArgumentParser(
        prog="run.py",
        description="Launcher for deext: dependency checks, setup, then the deext command line.",
        epilog="Everything after the launcher flags goes to deext, e.g. run.py --setup check inner --level 12",
    )
    parser.add_argument("--setup", action="store_true", help="Create .env and the output directory first")
    parser.add_argument("--debug", action="store_true", help="Pass --log-level DEBUG to deext")
    parser.add_argument("--check-deps", action="store_true", help="Report missing packages and exit")
    parser.add_argument("--install-deps", action="store_true", help="pip install -r requirements.txt first")
    return parser


def main(argv=None):
    """
    Launcher entry point

    Args:
        argv (list): Launcher flags followed by deext arguments

    Returns:
        int: Exit code; deext's own code when a command ran
    """
    parser = build_launcher()
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO, format=LOG_CONFIG["format"])

    if args.check_deps:
        if check_dependencies():
            print("numpy, scipy, pandas, plotly, python-dotenv and sympy are installed.")
            return 0
        print("Run `python run.py --install-deps` to install the missing packages.")
        return 1

    if args.install_deps and not install_dependencies():
        print("pip could not install requirements.txt.")
        return 1

    if args.setup:
        setup_environment()

    if rest:
        return run_app(rest, debug=args.debug)
    if args.setup or args.install_deps:
        return 0
    parser.print_help()
    return 1


if __name__ == "__main__":
    sys.exit(main())
