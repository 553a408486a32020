import os
import tempfile


def format_secs(secs):
    return "{0:.3f} secs".format(secs)


def ensure_dir(directory):
    if not os.path.exists(directory):
        os.makedirs(directory)


def atomic_write(path, text):
    """Write text to path through a temp file in the same directory + os.replace."""
    directory = os.path.dirname(os.path.abspath(path))
    ensure_dir(directory)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
