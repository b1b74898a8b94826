#pragma once

#include <stdexcept>
#include <string>

namespace nsbl {

/// Base for all solver-suite errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user-facing configuration (CLI / config file). Exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

/// A pipeline stage refused to run (precondition violated). Exit code 3.
struct StageRefusal : Error {
    StageRefusal(const std::string& stage, const std::string& what)
        : Error(stage + ": " + what), stage(stage) {}
    std::string stage;
};

/// A field required to decay at the top boundary does not.
struct DecayViolation : StageRefusal {
    DecayViolation(const std::string& field, double top, double scale)
        : StageRefusal("decay-check",
                       "field '" + field + "' violates tail tolerance at top boundary (|f|_top=" +
                           std::to_string(top) + ", scale=" + std::to_string(scale) + ")") {}
};

/// k=0 Neumann data incompatible with the right-hand side.
struct CompatibilityError : StageRefusal {
    explicit CompatibilityError(const std::string& what) : StageRefusal("compatibility", what) {}
};

struct CflViolation : StageRefusal {
    explicit CflViolation(const std::string& what) : StageRefusal("cfl", what) {}
};

/// Vorticity support reached the wall guard band.
struct SupportErosion : StageRefusal {
    explicit SupportErosion(const std::string& what) : StageRefusal("support-monitor", what) {}
};

/// Wall layer under-resolved; message carries the required ny estimate.
struct ResolutionRefusal : StageRefusal {
    explicit ResolutionRefusal(const std::string& what) : StageRefusal("resolution", what) {}
};

/// Analytic window ended (Prandtl gradient cap tripped).
struct WindowTermination : StageRefusal {
    explicit WindowTermination(const std::string& what) : StageRefusal("window", what) {}
};

struct WindowMismatch : StageRefusal {
    explicit WindowMismatch(const std::string& what) : StageRefusal("time-window", what) {}
};

}  // namespace nsbl
