from dataclasses import dataclass

import numpy as np


def norm(val, prop):
    """
    Map val from the raw range prop['r'] onto the normalized range prop['n']
    prop= {"n":[min,max], "r":[min,max]}
    """
    return (prop['n'][1] - prop['n'][0]) * (np.asarray(val, dtype=float) - prop['r'][0]) / \
           (prop['r'][1] - prop['r'][0]) + prop['n'][0]


def denorm(val, prop):
    """
    Inverse of norm
    prop= {"n":[min,max], "r":[min,max]}
    """
    return (np.asarray(val, dtype=float) - prop['n'][0]) / (prop['n'][1] - prop['n'][0]) * \
           (prop['r'][1] - prop['r'][0]) + prop['r'][0]


@dataclass(frozen=True)
class MinMaxScaling:
    """
    Affine covariate rescaling onto [0,1], kept so that curves can be reported
    in the original covariate units
    """
    raw_min: float
    raw_max: float

    def __post_init__(self):
        if not np.isfinite(self.raw_min) or not np.isfinite(self.raw_max):
            raise ValueError("covariate range must be finite")
        if not self.raw_max > self.raw_min:
            raise ValueError(f"cannot rescale a constant covariate (range [{self.raw_min}, "
                             f"{self.raw_max}])")

    @classmethod
    def fit(cls, values) -> "MinMaxScaling":
        values = np.asarray(values, dtype=float)
        return cls(raw_min=float(np.nanmin(values)), raw_max=float(np.nanmax(values)))

    @property
    def prop(self) -> dict:
        return {"n": [0.0, 1.0], "r": [self.raw_min, self.raw_max]}

    def apply(self, values) -> np.ndarray:
        # clip round-off at the range ends
        return np.clip(norm(values, self.prop), 0.0, 1.0)

    def invert(self, values) -> np.ndarray:
        return denorm(values, self.prop)

    def to_dict(self) -> dict:
        return {"kind": "min_max", "raw_min": self.raw_min, "raw_max": self.raw_max}
