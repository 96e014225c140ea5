#pragma once
// Batch orchestration: execute the analyses requested by a config in
// dependency order, write the CSV tables and the text report. Outputs are
// deterministic — rerunning an unchanged config reproduces every byte.

#include <string>
#include <vector>

namespace msfde {

// Parses `config_path`, runs the requested analyses, writes outputs into
// `out_dir` (created if needed). Throws ConfigError for configuration
// problems and other msfde::Error subclasses for numerical failures.
void run(const std::string& config_path, const std::string& out_dir);

// Canned demonstration runs; writes the demo's config as config.cfg in
// `out_dir`, then runs it. Unknown names raise ConfigError listing the
// valid ones.
void demo(const std::string& name, const std::string& out_dir);

std::vector<std::string> demo_names();

// The embedded canonical config text for a demo (same bytes as the copy
// shipped under configs/).
std::string demo_config_text(const std::string& name);

} // namespace msfde
