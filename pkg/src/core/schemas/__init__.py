from .MetricSet import MetricSet
from .EpochMetrics import EpochMetrics
from .CVSummary import CVSummary
from .ModelConfig import ModelConfig, VARIANTS
from .LoraConfig import LoraConfig
from .TrainConfig import TrainConfig
from .QARecord import QARecord, AnswerRecord
from .QAResponse import QAResponse
from .ComparisonRow import ComparisonRow
from .RunConfig import RunConfig
