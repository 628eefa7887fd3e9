// errors.hpp
// Exception hierarchy shared by all saddlenf modules.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace saddlenf {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad job data, mismatched ring instances, frame/tag mismatches.
class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// invert() on zero, a non-unit jet, or a singular linear part.
class NonInvertibleError : public Error {
public:
    explicit NonInvertibleError(const std::string& what_value)
        : Error("not invertible: " + what_value), value(what_value) {}
    std::string value;
};

class NotCoprimeError : public Error {
public:
    NotCoprimeError(long long p, long long q)
        : Error("p and q are not coprime: p=" + std::to_string(p) +
                " q=" + std::to_string(q)) {}
};

class NotIrrationalError : public Error {
public:
    using Error::Error;
};

// A stated eigenvalue hypothesis (saddle, modulus resonance, ratio
// consistency) failed; message names the violated inequality.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A homological divisor was zero (exact rings) or below the relative
// tolerance (approximate rings).
class SmallDivisorError : public Error {
public:
    SmallDivisorError(int component, long long k1, long long k2,
                      const std::string& divisor_repr)
        : Error("small divisor at component " + std::to_string(component) +
                ", exponent (" + std::to_string(k1) + "," + std::to_string(k2) +
                "): " + divisor_repr),
          component(component), k1(k1), k2(k2), divisor(divisor_repr) {}
    int component;
    long long k1, k2;
    std::string divisor;
};

// Witness for a violation of the predicted normal-form shape.
struct StructureWitness {
    int component = 0;        // 1 or 2
    long long m1 = 0, m2 = 0; // offending exponent
    std::string detail;
};

class StructureError : public Error {
public:
    StructureError(const std::string& msg, std::vector<StructureWitness> ws)
        : Error(msg), witnesses(std::move(ws)) {}
    std::vector<StructureWitness> witnesses;
};

} // namespace saddlenf
