from ._dhmc import (
    ConfigError,
    ContractError,
    DataError,
    Model,
    ModelError,
    OutOfSupport,
    UndefinedStatistic,
    UnsupportedTarget,
    batch_means_ess,
    compare,
    diagnose,
    kinetic_energy,
    model_names,
    run,
    run_chain,
)

__version__ = "0.1.0"
