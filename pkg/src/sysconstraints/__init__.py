"""Information-channel metrics and etiquette negotiation for systems of constraints."""

from .errors import (
    DomainError,
    NoChannelError,
    ParseError,
    SupersetViolation,
    ValidationError,
)
from .info_core import (
    Distribution,
    JointDistribution,
    RelativeInformation,
    conditional_entropy,
    entropy,
    entropy_bound,
    kl_divergence,
    mutual_bound,
    mutual_information,
    relative_information,
)
from .channel import (
    Alphabet,
    ChannelMetrics,
    ConstraintSet,
    channel_metrics,
    common_set,
    validate,
)
from .variation import SystemOfConstraints, VariationReport, system_variation, variation_bits

__version__ = "0.1.0"
