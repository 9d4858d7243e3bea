"""
Utility functions and structures.

.. autosummary::

    ~check_key
    ~check_not_value
    ~check_range
    ~check_type
    ~check_value
    ~dump_json
    ~json_digest
    ~get_package_info
    ~progress
    ~software_versions
"""

import hashlib
import logging
import pathlib
import sys
from importlib import metadata

import orjson
import tqdm

__all__ = """
    check_key
    check_not_value
    check_range
    check_type
    check_value
    dump_json
    get_package_info
    json_digest
    progress
    software_versions
""".split()
logger = logging.getLogger(__name__)


# when getting software package versions
DEFAULT_PACKAGE_LIST = "depscreen numpy pandas apischema joblib orjson".split()

JSON_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS


# standard value checks, raise exception(s) when appropriate
def check_key(key, biblio, intro):
    """Raise KeyError if key is not in biblio."""
    if key not in biblio:
        raise KeyError(f"{intro}:  expected {key!r} not in {biblio}")


def check_not_value(actual, avoid, intro):
    """Raise ValueError if actual IS equal to avoid."""
    if actual == avoid:
        raise ValueError(f"{intro}:  received: {actual}  cannot be: {avoid}")


def check_range(value, low, high, intro):
    """Raise ValueError if value is not between low & high."""
    if low > high:
        raise ValueError(f"{intro}:  {low} should not be greater than {high}")
    if not low <= value <= high:
        raise ValueError(f"{intro}:  {value} is not between {low} & {high}")


def check_type(actual, expected, intro):
    """Raise TypeError if actual is not an instance of expected."""
    if not isinstance(actual, expected):
        raise TypeError(f"{intro}:  received: {actual!r}  expected: {expected}")


def check_value(actual, expected, intro):
    """Raise ValueError if actual is not equal to expected."""
    if actual != expected:
        raise ValueError(f"{intro}:  received: {actual}  expected: {expected}")


def dump_json(document, path=None) -> bytes:
    """
    Canonical JSON bytes (sorted keys, 2-space indent, trailing newline).

    Written to ``path`` too, when given.
    """
    text = orjson.dumps(document, option=JSON_OPTIONS) + b"\n"
    if path is not None:
        pathlib.Path(path).write_bytes(text)
    return text


def json_digest(document) -> str:
    """SHA-256 hex digest of a document's canonical JSON."""
    compact = orjson.dumps(document, option=orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_SORT_KEYS)
    return hashlib.sha256(compact).hexdigest()


def progress(total, description="", enabled=True):
    """A tqdm bar on stderr, or a disabled one."""
    return tqdm.tqdm(total=total, desc=description, file=sys.stderr, disable=not enabled, leave=False)


def _installed_package_information():
    """Index name and version of the installed distributions."""
    packages = {}
    for dist in metadata.distributions():
        name = dist.metadata.get("Name")
        if name:
            packages[name.lower()] = {"version": dist.version}
    return packages


# cache of discovered installed package information
_package_info = None


def get_package_info(package_name):
    """Return dict of information about installed package, by name."""
    global _package_info
    if _package_info is None:
        # index the known packages
        # This is not expected to change once the process has started.
        _package_info = _installed_package_information()
    return _package_info.get(package_name.lower())


def software_versions(keys=None):
    """
    Report the package versions, in a dictionary.

    EXAMPLE::

        In [1]: import depscreen.util

        In [2]: depscreen.util.software_versions()
        Out[2]:
        {'apischema': '0.18.1',
        'depscreen': '0.1.dev4+g1a2b3c4',
        'joblib': '1.4.2',
        'numpy': '1.26.4',
        'orjson': '3.10.7',
        'pandas': '2.2.2'}

    Packages that are not installed are left out.
    """
    if keys is None or len(keys) == 0:
        keys = DEFAULT_PACKAGE_LIST
    v_dict = {}
    for key in keys:
        info = get_package_info(key)
        if info is not None:
            v_dict[key] = info.get("version")
    return v_dict
