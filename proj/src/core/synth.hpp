// Copyright 2026 The tracesyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Record synthesis from published marginals: marginal-initialised dataset,
// gradual updates towards the targets, bin decoding, and timestamp
// reconstruction from tsdiff.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binning.hpp"
#include "postprocess.hpp"
#include "rng.hpp"
#include "table.hpp"
#include "trace.hpp"

namespace tracesyn {

enum class InitMode {
  kMarginal,     // seed rows from the key attribute's marginals (GUMMI)
  kUniform,      // every attribute uniform over its bins (plain GUM)
  kIndependent,  // every attribute from its own 1-way marginal
};

struct SynthConfig {
  std::size_t n_records = 0;  // 0: the rounded consensus total of the targets
  std::string key_attribute;
  std::optional<std::size_t> n_init_marginals;  // unset: every table holding the key
  std::size_t max_iterations = 200;
  double alpha0 = 1.0;
  double alpha_decay = 0.84;
  double convergence_tol = 1e-3;  // 0 runs every iteration
  double duplicate_ratio = 0.5;  // share of moves into populated cells done by row copy
  InitMode init = InitMode::kMarginal;
};

/// Throws a config error when the parameters are out of range.
void validate(const SynthConfig& config);

struct SynthState {
  EncodedDataset rows;
  std::vector<std::size_t> init_marginals;  // indices into the target set, in rank order
  /// distances[t][k]: normalised L1 between target k and the rows after
  /// iteration t (t = 0 is the initial dataset).
  std::vector<std::vector<double>> distances;
  std::vector<std::size_t> rows_changed;  // per iteration
  std::size_t iterations = 0;
  std::vector<std::string> warnings;
};

/// Pearson correlation of the two attributes' bin indices under the joint
/// distribution proportional to the (clamped) cells. 0 when either side has
/// no variance.
double pearson_from_marginal(const Marginal& m);

/// Builds the initial synthetic rows. In marginal mode, tables holding the
/// key attribute are ranked by |Pearson| (high to low); the first fixes the
/// joint of its attributes, later ones fill their new attributes
/// conditionally on the attributes already set, and anything left comes from
/// 1-way targets. Counts are apportioned (largest remainder) rather than
/// drawn i.i.d., and row order is shuffled.
SynthState initialize_dataset(const std::vector<Marginal>& targets,
                              const std::vector<std::string>& attributes,
                              const std::vector<std::uint32_t>& domain_sizes,
                              const SynthConfig& config, std::size_t n_records, Rng& rng);

/// Runs update rounds until max_iterations or until the mean distance
/// improves by less than convergence_tol. Each round services every target
/// once, moving rows from over- to under-represented cells.
void gum_update(SynthState& state, const std::vector<Marginal>& targets, const SynthConfig& config,
                Rng& rng);

/// One service of one target at step size alpha. Returns rows changed.
std::size_t gum_step(EncodedDataset& rows, const Marginal& target, double alpha,
                     double duplicate_ratio, Rng& rng);

/// Current distance of `rows` to `target`.
double marginal_distance(const EncodedDataset& rows, const Marginal& target);

/// Samples a tsdiff increment: Gaussian around the bin midpoint with sigma a
/// quarter of the bin width, rounded, then clamped into the bin.
std::int64_t sample_increment(const Bin& bin, Rng& rng);

/// Fills the timestamp column of `rows` (decoded, in the same row order as
/// `encoded`): records are grouped on `group_key`, ordered by base-time
/// window; the first draws uniformly inside its window and each next one
/// adds a sampled tsdiff increment. The tsdiff column is dropped.
void reconstruct_timestamps(TraceDataset& rows, const EncodedDataset& encoded,
                            const BinMapping& mapping, const std::vector<std::string>& group_key,
                            Rng& rng);

struct SynthesisResult {
  TraceDataset dataset;
  SynthState state;
};

/// Initialise, update, decode (honouring ordering rules at value level) and
/// rebuild timestamps. `output_schema` is the raw schema (no tsdiff).
SynthesisResult synthesize(const std::vector<Marginal>& targets, const BinMapping& mapping,
                           const Schema& output_schema, const SynthConfig& config,
                           const std::vector<ProtocolRule>& rules,
                           const std::vector<std::string>& group_key, std::uint64_t seed);

}  // namespace tracesyn
