"""Dataset container, metrics, latent-space analysis, and report output."""

from .container import (BadMagicError, ContainerError, TruncatedPayloadError,
                        VersionError, build_header, read_dataset, read_header,
                        write_dataset)
from .latent import (ComparisonData, cls_encoder, embedding_comparison,
                     latent_arithmetic, reconstruct)
from .metrics import (MetricReport, Pca, fit_pca, max_normalize, nrmse,
                      pairwise_mean_distance, pca_project, required_seeds)
from .report import (save_bar_chart, save_field_comparison, save_loss_curves,
                     write_metrics_csv)

__all__ = [name for name in dir() if not name.startswith("_")]
