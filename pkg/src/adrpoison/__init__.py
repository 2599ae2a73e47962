"""Causative poisoning of learning-based demand-response incentive design."""

from .attack import (AttackOptions, AttackPlan, AttackSpec, AttackTrace, build_spec,
                     estimate_aggregate_behavior, monetary_impact, monetary_target, plan_attack,
                     select_compromised, simulate_attack)
from .errors import (ADRError, ConfigError, HistoryParseError, InvalidInputError, InvalidParameterError,
                     OrderingError, ReferentialError, SingularConfigurationError, SizeLimitError)
from .gridfreq import (FrequencyTrace, GridParams, RelayThresholds, attack_demand_profile, baseline_profile,
                       relay_check, simulate_frequency, window_curtailment)
from .incentive import (AggregatorParams, IncentiveResult, broadcast_incentive, brute_force_incentive_oracle,
                        closed_form_response, design_incentive)
from .learner import CustomerHistory, LearnerState, batch_ols, empirical_loss, ogd_fit, ogd_step
from .model import (AlphaParams, BetaParams, CustomerTruth, DREventRecord, alpha_to_beta, beta_to_alpha,
                    customer_utility, optimal_response, realized_response, responses)
from .scenario import (Scenario, default_config, load_config, load_customers, load_history, merge_config,
                       save_customers, save_history, scenario_from_data, synth_scenario, validate_history)
from .valuation import (CustomerValueReport, EventValueReport, rank_customers, shapley_events_exact,
                        shapley_events_mc, top_k_loss_curve)

__version__ = "0.1.0"
