#!/usr/bin/env python3

# platkh - constants
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Defaults shared by the platkh modules and the command line."""

import os

from sh import CommandNotFound, ErrorReturnCode, git  # type: ignore[import-untyped]

_MYHOME: str = os.environ.get("HOME", "/tmp")  # nosec B108
_HERE_list: list[str] = os.path.realpath(__file__).split("/")
# ['', 'home', 'pi', 'platkh', 'bin', 'constants.py']
_HERE: str = "/".join(_HERE_list[0:-2])
_CACHE: str = os.environ.get("PLATKH_CACHE", f"{_MYHOME}/.cache/platkh")

# fmt: off
PLATKH: dict = {
    "cache": _CACHE,
    "threads": os.cpu_count() or 1,
    "threads_env": "PLATKH_THREADS",
    "budget_terms": 200_000,
    "formats": ["table", "json"],
    "default_format": "table",
    "trace_format": "step={step} twist={twist} terms={terms} entries={entries} ms={ms:.0f}",
}

# (J, u2, hbar, C) weights of the generators, see libklrw.GradeVector
GRADES: dict = {
    "red_black": (1, 1, 0, 0),
    "black_black": (-2, 0, 1, 0),
    "dot": (2, 2, -1, 0),
    "u": (0, 0, 1, 0),
    "hbar": (0, 2, 0, 0),
    "winding": (0, 0, 0, 1),
}

EXIT: dict = {
    "ok": 0,
    "parse": 2,
    "resource": 3,
    "internal": 4,
}

CALIBRATION: dict = {
    "file": "calibration.json",
    "format": 1,
    # (pairs, word) with their oracle tables; unknot, unlink, Hopf, trefoil, mirror
    "samples": [
        (1, ""),
        (2, ""),
        (2, "s2 s2"),
        (2, "s2 s2 s2"),
        (2, "S2 S2 S2"),
    ],
    "epsilons": [-1, 1],
    "alphas": ["-1", "0", "1/2", "-1/2", "1"],
    "scales": [-1, 1, 2, -2],
    "chis": [1, -1],
    # accepted calibration, checked against the oracle tables by the tests and selftest
    "frozen": {
        "epsilon": -1,
        "alpha": "-1",
        "scale": -1,
        "chi": 1,
        "c_h": [0, 0, -1, 0],
        "c_q": [0, 1, -3, -1],
    },
}

ORACLE: dict = {
    "max_crossings": 14,
}

SELFTEST: dict = {
    "relation_samples": 10_000,
    "algebra_samples": 1_000,
    "matrix_samples": 200,
    "knots": [
        ("unknot", 1, ""),
        ("unlink", 2, ""),
        ("hopf", 2, "s2 s2"),
        ("trefoil", 2, "s2 s2 s2"),
        ("mirror trefoil", 2, "S2 S2 S2"),
        ("figure-eight", 3, "s2 s2 S1 s2 s4"),
    ],
}
# fmt: on


def get_app_version() -> str:
    """Retrieve information of current version of platkh.

    Returns:
        versionstring
    """
    # git log -n1 --format="%h"
    # git --no-pager log -1 --format="%ai"
    git_args = ["-C", f"{_HERE}", "--no-pager", "log", "-1", "--format='%h'"]
    try:
        _exit_h = git(git_args).strip("\n").strip("'")
        git_args[5] = "--format='%ai'"
        _exit_ai = git(git_args).strip("\n").strip("'")
    except (CommandNotFound, ErrorReturnCode) as e:
        print(f"Error executing git command: {e}")
        return "unknown"
    return f"{_exit_h}  -  {_exit_ai}"


if __name__ == "__main__":
    print(f"home              = {_MYHOME}")
    print(f"cache location    = {_CACHE}")
    print("")
    print(f"platkh (me)       = {get_app_version()}")
