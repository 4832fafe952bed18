from .dataset import (
    DatasetPair, LabeledInstance, TrainingView, EvaluationView,
    Scenario, Domain, MISSING_LABEL,
)
from .generators import make_two_moons, make_gaussian_grid, make_open_set_grid, grid_centers, class_means
from .label_space import restrict_label_space
from .csv_io import save_csv, load_csv, dataset_fingerprint
