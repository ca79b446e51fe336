# Copyright 2026 The TAMIS Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Graphical-model synthetic data generators and membership inference attacks."""

from ._core import (
    INF,
    Dataset,
    Model,
    TamisError,
    activate,
    aggregate_households,
    align,
    attack,
    auroc,
    balanced_accuracy,
    compare_structures,
    default_config,
    exp,
    fit,
    load_csv,
    parse_csv,
    recover,
    replicate,
    shadow_weights,
    simulate_population,
)

__all__ = [
    "INF",
    "Dataset",
    "Model",
    "TamisError",
    "activate",
    "aggregate_households",
    "align",
    "attack",
    "auroc",
    "balanced_accuracy",
    "compare_structures",
    "default_config",
    "exp",
    "fit",
    "load_csv",
    "parse_csv",
    "recover",
    "replicate",
    "shadow_weights",
    "simulate_population",
]
