#include "msfde/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msfde/errors.hpp"

namespace msfde {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& key,
                       const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": " +
                      msg);
}

double parse_number(std::string tok, std::size_t line,
                    const std::string& key) {
    tok = trim(tok);
    if (!tok.empty() && tok.front() == '+') tok.erase(tok.begin());
    double out = 0.0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    const auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc() || res.ptr != e || tok.empty())
        fail(line, key, "'" + tok + "' is not a number");
    return out;
}

std::int64_t parse_integer(const std::string& tok, std::size_t line,
                           const std::string& key) {
    const double v = parse_number(tok, line, key);
    const double r = std::round(v);
    if (std::abs(v - r) > 0.0) fail(line, key, "expected an integer");
    return static_cast<std::int64_t>(r);
}

// "[a, b, c]" or "a, b, c" -> tokens; empty list allowed via "[]".
std::vector<std::string> split_list(const std::string& value,
                                    std::size_t line,
                                    const std::string& key) {
    std::string s = trim(value);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') fail(line, key, "unterminated '['");
        s = trim(s.substr(1, s.size() - 2));
    }
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size() && !s.empty()) {
        const auto comma = s.find(',', pos);
        const std::string tok =
            trim(s.substr(pos, comma == std::string::npos ? std::string::npos
                                                          : comma - pos));
        if (tok.empty()) fail(line, key, "empty list entry");
        out.push_back(tok);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

// "[[a, b], [c, d]]" -> rows of numbers; every row must have `cols` entries.
std::vector<std::vector<double>> parse_rows(const std::string& value,
                                            std::size_t cols,
                                            std::size_t line,
                                            const std::string& key) {
    std::vector<std::vector<double>> rows;
    const std::string s = trim(value);
    std::size_t i = 0;
    const std::size_t n = s.size();
    const auto skip_ws = [&] {
        while (i < n && (s[i] == ' ' || s[i] == '\t')) ++i;
    };
    skip_ws();
    if (i >= n || s[i] != '[') fail(line, key, "expected '['");
    ++i;
    skip_ws();
    if (i < n && s[i] == ']') {
        ++i;
        skip_ws();
        if (i != n) fail(line, key, "trailing characters after ']'");
        return rows;
    }
    for (;;) {
        skip_ws();
        if (i >= n || s[i] != '[')
            fail(line, key, "expected '[' to start a row");
        ++i;
        std::vector<double> row;
        for (;;) {
            skip_ws();
            const std::size_t start = i;
            while (i < n && s[i] != ',' && s[i] != ']') ++i;
            if (i >= n) fail(line, key, "unterminated row");
            row.push_back(
                parse_number(s.substr(start, i - start), line, key));
            if (s[i] == ',') {
                ++i;
                continue;
            }
            ++i;  // closing ']'
            break;
        }
        if (row.size() != cols)
            fail(line, key,
                 "each row needs " + std::to_string(cols) + " entries");
        rows.push_back(std::move(row));
        skip_ws();
        if (i < n && s[i] == ',') {
            ++i;
            continue;
        }
        if (i < n && s[i] == ']') {
            ++i;
            skip_ws();
            if (i != n) fail(line, key, "trailing characters after ']'");
            return rows;
        }
        fail(line, key, "expected ',' or ']' between rows");
    }
}

struct RawConfig {
    std::optional<double> h, T, tau;
    std::size_t h_line = 0;
    std::vector<Atom> nu_atoms, mu_atoms;
    std::vector<DensityPiece> nu_density, mu_density;
    std::size_t nu_line = 0, mu_line = 0;
    ForcingSpec f, g;
    PsiSpec psi;
    McConfig mc{1000, 1, PsiMode::deterministic};
    std::vector<double> checkpoints;
    std::optional<std::vector<Analysis>> analyses;
};

ForcingKind forcing_kind_from(const std::string& v, std::size_t line,
                              const std::string& key) {
    if (v == "zero") return ForcingKind::zero;
    if (v == "constant") return ForcingKind::constant;
    if (v == "csv") return ForcingKind::csv;
    if (v == "chirp") return ForcingKind::chirp;
    if (v == "spikes") return ForcingKind::spikes;
    if (v == "exp_decay") return ForcingKind::exp_decay;
    fail(line, key,
         "unknown kind '" + v +
             "' (expected zero, constant, csv, chirp, spikes, exp_decay)");
}

void apply_forcing_key(ForcingSpec& fs, const std::string& section,
                       const std::string& k, const std::string& v,
                       std::size_t line) {
    const std::string key = section + "." + k;
    if (k == "kind") {
        fs.kind = forcing_kind_from(v, line, key);
    } else if (k == "c") {
        fs.c = parse_number(v, line, key);
    } else if (k == "path") {
        fs.path = v;
    } else if (k == "alpha") {
        fs.alpha = parse_number(v, line, key);
    } else if (k == "beta") {
        fs.beta = parse_number(v, line, key);
    } else if (k == "scale") {
        fs.scale = parse_number(v, line, key);
    } else if (k == "rate") {
        fs.rate = parse_number(v, line, key);
    } else if (k == "schedule") {
        fs.spikes.clear();
        for (const auto& row : parse_rows(v, 3, line, key)) {
            if (row[0] < 0 || row[0] != std::floor(row[0]))
                fail(line, key, "spike interval index must be an integer");
            fs.spikes.push_back(SpikeEntry{
                static_cast<std::int64_t>(row[0]), row[1], row[2]});
        }
    } else {
        fail(line, key, "unknown key");
    }
}

} // namespace

const char* analysis_name(Analysis a) {
    switch (a) {
        case Analysis::resolvent: return "resolvent";
        case Analysis::kernel: return "kernel";
        case Analysis::meansquare: return "meansquare";
        case Analysis::classify: return "classify";
        case Analysis::simulate: return "simulate";
        case Analysis::compare: return "compare";
    }
    return "?";
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");

    RawConfig raw;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Strip comments and surrounding whitespace.
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"grid", "nu",  "mu", "f",
                                          "g",    "psi", "mc", "analyses"};
            bool ok = false;
            for (const char* s : known) ok = ok || section == s;
            if (!ok)
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string k = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key '" +
                              k + "' appears before any [section]");
        const std::string key = section + "." + k;

        if (section == "grid") {
            if (k == "h") {
                raw.h = parse_number(v, line_no, key);
                raw.h_line = line_no;
            } else if (k == "T") {
                raw.T = parse_number(v, line_no, key);
            } else if (k == "tau") {
                raw.tau = parse_number(v, line_no, key);
            } else {
                fail(line_no, key, "unknown key");
            }
        } else if (section == "nu" || section == "mu") {
            auto& atoms = section == "nu" ? raw.nu_atoms : raw.mu_atoms;
            auto& density = section == "nu" ? raw.nu_density : raw.mu_density;
            (section == "nu" ? raw.nu_line : raw.mu_line) = line_no;
            if (k == "atoms") {
                atoms.clear();
                for (const auto& row : parse_rows(v, 2, line_no, key))
                    atoms.push_back(Atom{row[0], row[1]});
            } else if (k == "density") {
                density.clear();
                for (const auto& row : parse_rows(v, 3, line_no, key))
                    density.push_back(DensityPiece{row[0], row[1], row[2]});
            } else {
                fail(line_no, key, "unknown key");
            }
        } else if (section == "f" || section == "g") {
            apply_forcing_key(section == "f" ? raw.f : raw.g, section, k, v,
                              line_no);
        } else if (section == "psi") {
            if (k == "kind") {
                if (v == "constant")
                    raw.psi.kind = PsiSpec::Kind::constant;
                else if (v == "samples")
                    raw.psi.kind = PsiSpec::Kind::samples;
                else if (v == "exp")
                    raw.psi.kind = PsiSpec::Kind::exp;
                else if (v == "cos_exp")
                    raw.psi.kind = PsiSpec::Kind::cos_exp;
                else
                    fail(line_no, key,
                         "unknown kind '" + v +
                             "' (expected constant, samples, exp, cos_exp)");
            } else if (k == "c") {
                raw.psi.c = parse_number(v, line_no, key);
            } else if (k == "path") {
                raw.psi.path = v;
            } else if (k == "lambda") {
                raw.psi.lambda = parse_number(v, line_no, key);
            } else if (k == "re") {
                raw.psi.re = parse_number(v, line_no, key);
            } else if (k == "im") {
                raw.psi.im = parse_number(v, line_no, key);
            } else {
                fail(line_no, key, "unknown key");
            }
        } else if (section == "mc") {
            if (k == "paths") {
                const std::int64_t p = parse_integer(v, line_no, key);
                if (p < 2) fail(line_no, key, "at least two paths required");
                raw.mc.paths = p;
            } else if (k == "seed") {
                const double s = parse_number(v, line_no, key);
                if (s < 0 || s != std::floor(s))
                    fail(line_no, key, "expected a nonnegative integer");
                raw.mc.seed = static_cast<std::uint64_t>(s);
            } else if (k == "psi_mode") {
                if (v == "deterministic")
                    raw.mc.psi_mode = PsiMode::deterministic;
                else if (v == "random")
                    raw.mc.psi_mode = PsiMode::random;
                else
                    fail(line_no, key,
                         "expected 'deterministic' or 'random'");
            } else if (k == "checkpoints") {
                raw.checkpoints.clear();
                for (const auto& tok : split_list(v, line_no, key))
                    raw.checkpoints.push_back(
                        parse_number(tok, line_no, key));
            } else {
                fail(line_no, key, "unknown key");
            }
        } else if (section == "analyses") {
            if (k == "run") {
                std::vector<Analysis> as;
                for (const auto& tok : split_list(v, line_no, key)) {
                    if (tok == "resolvent")
                        as.push_back(Analysis::resolvent);
                    else if (tok == "kernel")
                        as.push_back(Analysis::kernel);
                    else if (tok == "meansquare")
                        as.push_back(Analysis::meansquare);
                    else if (tok == "classify")
                        as.push_back(Analysis::classify);
                    else if (tok == "simulate")
                        as.push_back(Analysis::simulate);
                    else if (tok == "compare")
                        as.push_back(Analysis::compare);
                    else
                        fail(line_no, key, "unknown analysis '" + tok + "'");
                }
                raw.analyses = std::move(as);
            } else {
                fail(line_no, key, "unknown key");
            }
        }
    }

    if (!raw.h) throw ConfigError("missing key grid.h");
    if (!raw.T) throw ConfigError("missing key grid.T");
    if (!raw.tau) throw ConfigError("missing key grid.tau");

    // Grid invariants (positivity, integer step ratios) surface as grid.h
    // problems: that is the knob that fixes them.
    std::optional<Grid> grid;
    try {
        grid.emplace(*raw.h, *raw.T, *raw.tau);
    } catch (const DomainError& e) {
        throw ConfigError("line " + std::to_string(raw.h_line) +
                          ": grid.h: " + std::string(e.what()));
    }

    const auto build_measure = [&](const std::vector<Atom>& atoms,
                                   const std::vector<DensityPiece>& density,
                                   std::size_t at_line,
                                   const char* name) -> FiniteSignedMeasure {
        try {
            FiniteSignedMeasure m(*raw.tau, atoms, density);
            require_grid_aligned(m, *grid);
            return m;
        } catch (const DomainError& e) {
            throw ConfigError("line " +
                              std::to_string(at_line ? at_line : raw.h_line) +
                              ": " + name + ": " + std::string(e.what()));
        }
    };
    FiniteSignedMeasure nu =
        build_measure(raw.nu_atoms, raw.nu_density, raw.nu_line, "nu.atoms");
    FiniteSignedMeasure mu =
        build_measure(raw.mu_atoms, raw.mu_density, raw.mu_line, "mu.atoms");

    std::vector<Analysis> analyses = raw.analyses.value_or(std::vector<
        Analysis>{Analysis::resolvent, Analysis::kernel, Analysis::meansquare,
                  Analysis::classify, Analysis::simulate, Analysis::compare});
    std::vector<double> checkpoints = raw.checkpoints;
    if (checkpoints.empty())
        checkpoints = {grid->T() / 4, grid->T() / 2, 3 * grid->T() / 4,
                       grid->T()};

    return RunConfig{*grid,
                     std::move(nu),
                     std::move(mu),
                     std::move(raw.f),
                     std::move(raw.g),
                     std::move(raw.psi),
                     raw.mc,
                     std::move(checkpoints),
                     std::move(analyses)};
}

FunctionTable sample_psi(const PsiSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case PsiSpec::Kind::constant:
            return sample_on_delay(grid, [&](double) { return spec.c; });
        case PsiSpec::Kind::samples:
            return detail::load_node_csv(spec.path, grid, -grid.n_delay(), 0,
                                         "psi csv");
        case PsiSpec::Kind::exp:
            return sample_on_delay(
                grid, [&](double t) { return std::exp(spec.lambda * t); });
        case PsiSpec::Kind::cos_exp:
            return sample_on_delay(grid, [&](double t) {
                return std::exp(spec.re * t) * std::cos(spec.im * t);
            });
    }
    throw DomainError("psi: unknown kind");
}

} // namespace msfde
