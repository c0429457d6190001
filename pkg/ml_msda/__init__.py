from .config import Config, RunConfig
from .evaluation import evaluate, run_ablations
from .model import MlMsdaModel, init_model
from .training import run_training, train

__all__ = ['Config', 'MlMsdaModel', 'RunConfig', 'evaluate', 'init_model', 'run_ablations', 'run_training', 'train']
