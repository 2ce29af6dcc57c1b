"""Python bindings for the rb1 compiler and runtime."""

import json
import os
import subprocess

from ._rb1 import Environment, Error, Program, SplitMix64

__all__ = ["Environment", "Error", "Program", "SplitMix64", "cli_path", "Session"]


def cli_path():
    """Path of the bundled rb1 executable."""
    return os.path.join(os.path.dirname(__file__), "bin", "rb1")


class Session:
    """A `rb1 serve` subprocess speaking line-delimited JSON."""

    def __init__(self, source_path, act=None):
        args = [cli_path(), "serve", source_path]
        if act is not None:
            args += ["--act", act]
        self._proc = subprocess.Popen(
            args, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True
        )

    def request(self, cmd, **fields):
        fields["cmd"] = cmd
        self._proc.stdin.write(json.dumps(fields) + "\n")
        self._proc.stdin.flush()
        return json.loads(self._proc.stdout.readline())

    def close(self):
        if self._proc.poll() is None:
            self.request("quit")
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
