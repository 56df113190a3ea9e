"""RIS-assisted NOMA-ISAC max-min beampattern optimizer."""

from ._risnoma import (
    ConfigError,
    InfeasibleError,
    RisnomaError,
    SystemConfig,
    algorithm3,
    baseline,
    beampattern_gain,
    build_scenario,
    config_hash,
    dbm_to_watt,
    lift_phases,
    load_config,
    parse_config,
    pathloss,
    profile_config,
    run_trial,
    steering_vector,
    version,
)

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "RisnomaError",
    "SystemConfig",
    "algorithm3",
    "baseline",
    "beampattern_gain",
    "build_scenario",
    "config_hash",
    "dbm_to_watt",
    "lift_phases",
    "load_config",
    "parse_config",
    "pathloss",
    "profile_config",
    "run_trial",
    "steering_vector",
    "version",
]
