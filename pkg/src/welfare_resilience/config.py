from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from ._validation import check_int, check_probability
from .exceptions import InvalidInput

AIC_VARIANTS = ("aic", "aicc")
ADF_VARIANTS = ("tau", "joint_f")
TREND_RULES = ("significance", "sign")


@dataclass(frozen=True)
class AnalysisConfig:
    """Settings shared by every per-unit analysis.

    ``sample_windows`` maps a unit id to an inclusive ``(from, to)`` time range;
    either end may be ``None``. It is how known structural breaks are excluded
    before fitting. ``trend_rule="sign"`` classifies the trend by the raw sign
    of ``g`` instead of its significance.
    """

    max_p: int = 2
    max_q: int = 2
    alpha_trend: float = 0.05
    ljung_box_lags: Optional[int] = None
    sample_windows: Mapping[str, Tuple[Optional[int], Optional[int]]] = field(default_factory=dict)
    interpolation: bool = False
    aic_variant: str = "aic"
    adf_variant: str = "tau"
    trend_rule: str = "significance"
    screen: bool = True
    random_seed: int = 0

    def __post_init__(self):
        check_int(self.max_p, "max_p", minimum=0)
        check_int(self.max_q, "max_q", minimum=0)
        check_probability(self.alpha_trend, "alpha_trend")
        if self.ljung_box_lags is not None:
            check_int(self.ljung_box_lags, "ljung_box_lags", minimum=1)
        if self.aic_variant not in AIC_VARIANTS:
            raise InvalidInput(f"aic_variant must be one of {AIC_VARIANTS}")
        if self.adf_variant not in ADF_VARIANTS:
            raise InvalidInput(f"adf_variant must be one of {ADF_VARIANTS}")
        if self.trend_rule not in TREND_RULES:
            raise InvalidInput(f"trend_rule must be one of {TREND_RULES}")
        check_int(self.random_seed, "random_seed", minimum=0)
        for unit, (lo, hi) in dict(self.sample_windows).items():
            if lo is not None and hi is not None and lo > hi:
                raise InvalidInput(f"window for {unit!r} is empty: {lo} > {hi}")
