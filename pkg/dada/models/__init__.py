from .network import (
    DadaNetwork, ProbOutput, forward, probabilities_from_logits, domain_pred_vector,
    domain_pred_shares, predict_category, init_network, glorot_bound,
    get_degenerate_events, reset_degenerate_events,
)
from .checkpoint import save_checkpoint, load_checkpoint, CHECKPOINT_FORMAT_VERSION
