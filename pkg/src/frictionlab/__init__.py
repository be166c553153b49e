"""Joint friction toolkit: simulation, identification, torque regression,
domain randomization, and trot-gait rewards."""

__version__ = "0.1.0"

from frictionlab.actuator_net import (ActuatorDataset, ActuatorNetModel,
                                      ActuatorNetRegressor, FeatureWindow,
                                      build_windows, evaluate, mixture_target,
                                      predict, train)
from frictionlab.domain_rand import (EnvironmentSample, RandomizationConfig,
                                     damping_equivalence_check, deception_config,
                                     sample, table2_config)
from frictionlab.errors import (ConstraintViolationError, FrictionLabError,
                                IdentificationFailureError, InvalidInputError,
                                TrainingDivergenceError)
from frictionlab.gait import (GROUP0, GROUP1, ContactFrame, r_trot, r_unsync,
                              reward_series)
from frictionlab.joint import (DEFAULT_DT, STICTION_BAND, JointParams, JointState,
                               action_to_target, friction_torque, pd_torque,
                               simulate, step)
from frictionlab.sysid import (Excitation, FixedGains, IdentificationResult,
                               JointParamIdentifier, add_angle_noise,
                               excitation_target, friction_ratio,
                               identification_objective, identify)
from frictionlab.trajectory import Trajectory

__all__ = [
    "__version__",
    "ActuatorDataset", "ActuatorNetModel", "ActuatorNetRegressor", "FeatureWindow",
    "build_windows", "evaluate", "mixture_target", "predict", "train",
    "EnvironmentSample", "RandomizationConfig", "damping_equivalence_check",
    "deception_config", "sample", "table2_config",
    "ConstraintViolationError", "FrictionLabError", "IdentificationFailureError",
    "InvalidInputError", "TrainingDivergenceError",
    "GROUP0", "GROUP1", "ContactFrame", "r_trot", "r_unsync", "reward_series",
    "DEFAULT_DT", "STICTION_BAND", "JointParams", "JointState", "action_to_target",
    "friction_torque", "pd_torque", "simulate", "step",
    "Excitation", "FixedGains", "IdentificationResult", "JointParamIdentifier",
    "add_angle_noise", "excitation_target", "friction_ratio",
    "identification_objective", "identify",
    "Trajectory",
]
