from .augment import (AugmentConfig, Group, augment, default_eps_max,
                      fourier_shift, galilean_boost, time_shift)

__all__ = ["AugmentConfig", "Group", "augment", "default_eps_max",
           "fourier_shift", "galilean_boost", "time_shift"]
