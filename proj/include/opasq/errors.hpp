#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace opasq {

// Base class for all simulator errors. category() is a stable machine-readable
// token; the CLI prints it verbatim so scripts can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(category + ": " + message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct MissingKeyError : Error {
    explicit MissingKeyError(const std::string& key)
        : Error("MissingKey", "required key '" + key + "' not set") {}
};

struct UnitParseError : Error {
    UnitParseError(const std::string& key, const std::string& detail)
        : Error("UnitParseError", "key '" + key + "': " + detail) {}
};

struct InvariantViolation : Error {
    explicit InvariantViolation(const std::string& detail)
        : Error("InvariantViolation", detail) {}
};

struct AboveThresholdError : Error {
    explicit AboveThresholdError(const std::string& detail)
        : Error("AboveThreshold", detail) {}
};

struct ZeroCouplingError : Error {
    explicit ZeroCouplingError(const std::string& detail)
        : Error("ZeroCoupling", detail) {}
};

struct SingularInputError : Error {
    explicit SingularInputError(const std::string& detail)
        : Error("SingularInput", detail) {}
};

struct SingularSystemError : Error {
    explicit SingularSystemError(double omega_rad_s)
        : Error("SingularSystem",
                "system matrix singular at omega = " + std::to_string(omega_rad_s) + " rad/s"),
          omega(omega_rad_s) {}
    double omega;
};

struct AssumptionViolated : Error {
    explicit AssumptionViolated(const std::vector<std::string>& failed)
        : Error("AssumptionViolated", join(failed)), assumptions(failed) {}
    std::vector<std::string> assumptions;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& a : v) {
            if (!s.empty()) s += "; ";
            s += a;
        }
        return s;
    }
};

struct NoCutoffFoundError : Error {
    explicit NoCutoffFoundError(const std::string& detail) : Error("NoCutoffFound", detail) {}
};

struct ZeroFrequencyError : Error {
    ZeroFrequencyError() : Error("ZeroFrequency", "strain density undefined at Omega = 0") {}
};

struct MissingFilterLinewidthError : Error {
    MissingFilterLinewidthError()
        : Error("MissingFilterLinewidth", "amplitude-filter scheme requires gamma_f > 0") {}
};

struct UnstableIntegrationError : Error {
    explicit UnstableIntegrationError(const std::string& detail)
        : Error("UnstableIntegration", detail) {}
};

} // namespace opasq
