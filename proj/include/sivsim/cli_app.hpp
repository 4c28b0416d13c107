// Copyright 2026 The sivsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace sivsim {

// Entry point of the command line tool (kept in the library so tests can
// drive it in-process).  Subcommands:
//   list               show experiments, default grids and fit models
//   validate <config>  parse and check a run config, write nothing
//   run <config>       run the sweep, write CSV + metadata (+ fit, trajectory)
//   fit <csv> <model>  fit a model to two columns of a CSV
// Returns the process exit code: 0 on success, 1 on any runtime or
// configuration error, 2 on command line usage errors.
int cli_main(int argc, const char* const* argv);

}  // namespace sivsim
