"""
Run configuration.

All tolerances and strip/integrator parameters live in ``defaults.json``,
next to this file. A user file given with ``--config`` is laid over the
defaults, section by section; unknown keys are rejected.
"""
import copy
import json
import os

from .errors import ConfigError

THISDIR = os.path.dirname(os.path.realpath(__file__))
FILE_DEFAULTS = os.path.join(THISDIR, 'defaults.json')

_DEFAULTS = json.load(open(FILE_DEFAULTS, 'rt'))
_active = copy.deepcopy(_DEFAULTS)


def get(section, key=None):
    """
    Returns the active value of `key` in `section`, or the whole section
    (a copy) if `key` is None.
    """
    if section not in _active:
        raise ConfigError("Unknown configuration section: " + str(section))
    if key is None:
        return copy.deepcopy(_active[section])
    if key not in _active[section]:
        raise ConfigError("Unknown configuration key: " + section + "." +
                          str(key))
    return _active[section][key]


def pick(section, key, value):
    """
    Returns `value` unless it is None, in which case the active value of
    `section.key` is returned. Used for the keyword overrides of every
    public operation.
    """
    if value is None:
        return get(section, key)
    return value


def load(path):
    """
    Lays the JSON file in `path` over the defaults.

    Parameters
    ----------

    * path : str
        a JSON file with the same layout as ``defaults.json``; sections and
        keys may be omitted

    Returns
    -------

    dict :
        the resulting configuration (a copy)
    """
    global _active
    try:
        user = json.load(open(path, 'rt'))
    except (OSError, ValueError) as e:
        raise ConfigError("Cannot read configuration file " + str(path) +
                          ": " + str(e))
    if not isinstance(user, dict):
        raise ConfigError("Configuration file must hold a JSON object")

    merged = copy.deepcopy(_DEFAULTS)
    for section, values in user.items():
        if section not in merged:
            raise ConfigError("Unknown configuration section: " + section)
        if not isinstance(values, dict):
            raise ConfigError("Section " + section + " must be an object")
        for key, value in values.items():
            if key not in merged[section]:
                raise ConfigError("Unknown configuration key: " + section +
                                  "." + key)
            merged[section][key] = value
    _active = merged
    return snapshot()


def update(section, **values):
    """
    Overrides single values of the active configuration (mostly for tests).
    """
    for key, value in values.items():
        if section not in _active or key not in _active[section]:
            raise ConfigError("Unknown configuration key: " + section + "." +
                              key)
        _active[section][key] = value


def reset():
    """
    Restores the defaults
    """
    global _active
    _active = copy.deepcopy(_DEFAULTS)


def snapshot():
    """
    Returns a deep copy of the whole active configuration (the run config
    echoed in reports).
    """
    return copy.deepcopy(_active)
