"""File and random-stream plumbing shared by the pipeline stages."""
import contextlib
import os
import zlib

import numpy as np


@contextlib.contextmanager
def atomic_open(path, mode="w"):
    """Write to a temporary sibling and rename over ``path`` only on success.

    An interrupted write never leaves a partial file at ``path``.
    """
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    fh = open(tmp, mode, newline="" if "b" not in mode else None)
    try:
        yield fh
    except BaseException:
        fh.close()
        with contextlib.suppress(OSError):
            os.remove(tmp)
        raise
    fh.close()
    os.replace(tmp, path)


def write_text_atomic(path, text):
    with atomic_open(path) as fh:
        fh.write(text)


def stream(seed, name):
    """Independent generator for the named stage of a seeded run.

    Streams are derived from ``(seed, crc32(name))`` through numpy's
    ``SeedSequence`` so every stage is reproducible on its own.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(name.encode()),))
    return np.random.Generator(np.random.PCG64(ss))
