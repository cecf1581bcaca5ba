import json
import platform

import attr
import numpy
import scipy

from . import _version

__version__ = _version.pyliouville_version

SCHEMA_VERSION = "1.0.0"


@attr.s
class ProvenanceMetadata(object):
    version = attr.ib()
    command = attr.ib()
    config = attr.ib()


def get_environment():
    """
    Returns a dictionary describing the environment in which pyliouville
    is currently running.
    """
    env = {
        "libraries": {
            "numpy": {"version": numpy.__version__},
            "scipy": {"version": scipy.__version__},
            "attrs": {"version": attr.__version__},
        },
        "os": {
            "system": platform.system(),
            "node": platform.node(),
            "release": platform.release(),
            "version": platform.version(),
            "machine": platform.machine(),
        },
        "python": {
            "implementation": platform.python_implementation(),
            "version": platform.python_version_tuple(),
        }
    }
    return env


def make_provenance_dict(command=None, config=None):
    """
    Returns a dictionary recording this version of pyliouville, the command
    that was run, and its configuration.

    :param list command: The command line, as a list of strings.
    :param dict config: The experiment configuration.
    """
    document = {
        "schema_version": SCHEMA_VERSION,
        "software": {
            "name": "pyliouville",
            "version": __version__,
        },
        "parameters": {
            "command": [] if command is None else list(command),
            "config": {} if config is None else config,
        },
        "environment": get_environment()
    }
    return document


def provenance_version(record):
    """
    Returns ``(is_ours, version)``: whether the record (a dictionary or a
    JSON string) was written by pyliouville, and the software version that
    wrote it, or "unknown".
    """
    if isinstance(record, str):
        record = json.loads(record)
    try:
        name = record["software"]["name"]
        version = record["software"]["version"]
    except (KeyError, TypeError):
        return False, "unknown"
    return name == "pyliouville", version


def parse_provenance(record):
    '''
    Parses a pyliouville provenance record, returning a
    :class:`ProvenanceMetadata` object, or raising an error if the record was
    written by other software.

    :rtype ProvenanceMetadata:
    '''
    if isinstance(record, str):
        record = json.loads(record)
    is_ours, version = provenance_version(record)
    if not is_ours:
        raise ValueError("Not a pyliouville provenance record.")
    params = record.get("parameters", {})
    return ProvenanceMetadata(version, params.get("command", []), params.get("config", {}))


def write_provenance(path, command=None, config=None):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(make_provenance_dict(command, config), f, indent=2, sort_keys=True)
        f.write("\n")
