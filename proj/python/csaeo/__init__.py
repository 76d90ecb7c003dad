# Copyright 2026 The CSA-EO Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the csaeo simulator."""

from ._core import (
    CheckpointError,
    Codec,
    ConfigError,
    MsimError,
    confusion_csv,
    constellation,
    cross_entropy,
    fspl_db,
    generate_synthetic,
    ground_path_loss_db,
    load_dataset_dir,
    load_msim,
    run_channel_probe,
    run_compare_csa,
    run_ser_curve,
    run_sweep,
    run_train,
    sa_loss,
    sample_fading,
    ser_16psk_analytic,
    ser_monte_carlo,
    slant_range_km,
    top1,
    write_msim,
)

__all__ = [name for name in dir() if not name.startswith("_")]
