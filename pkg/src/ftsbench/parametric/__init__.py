from .garch import (Garch11Fit, DegenerateSeriesError, fit_garch11,
                    garch11_filter, gaussian_loglik, student_t_loglik)
from .dcc import (DccFit, FitSchedule, fit_dcc, simulate_from_fit,
                  rolling_refit, filtered_correlations, save_fit, load_fit)

__all__ = [
    "Garch11Fit", "DegenerateSeriesError", "fit_garch11", "garch11_filter",
    "gaussian_loglik", "student_t_loglik",
    "DccFit", "FitSchedule", "fit_dcc", "simulate_from_fit", "rolling_refit",
    "filtered_correlations", "save_fit", "load_fit",
]
