#pragma once
// Batch run configuration: a flat section/key text format mirroring the
// problem definition (grid, measures, forcings, initial segment, Monte Carlo
// settings, requested analyses). Parse errors carry the offending line
// number and the section.key name.

#include <cstdint>
#include <string>
#include <vector>

#include "msfde/forcing.hpp"
#include "msfde/grid.hpp"
#include "msfde/measures.hpp"
#include "msfde/montecarlo.hpp"

namespace msfde {

struct PsiSpec {
    enum class Kind { constant, samples, exp, cos_exp };
    Kind kind = Kind::constant;
    double c = 1.0;       // constant(c)
    std::string path;     // samples(csv of (t, value) at nodes of [-tau, 0])
    double lambda = 0.0;  // exp: e^{lambda t}
    double re = 0.0;      // cos_exp: e^{re t} cos(im t)
    double im = 0.0;
};

enum class Analysis { resolvent, kernel, meansquare, classify, simulate,
                      compare };

const char* analysis_name(Analysis a);

struct RunConfig {
    Grid grid;
    FiniteSignedMeasure nu;
    FiniteSignedMeasure mu;
    ForcingSpec f;
    ForcingSpec g;
    PsiSpec psi;
    McConfig mc;
    std::vector<double> checkpoints;  // compare times; defaults to quarters
    std::vector<Analysis> analyses;
};

// Parses and validates a config file; grid construction and measure
// alignment failures surface as config errors naming the key that caused
// them.
RunConfig load_config(const std::string& path);

// Realizes the initial segment on [-tau, 0].
FunctionTable sample_psi(const PsiSpec& spec, const Grid& grid);

} // namespace msfde
