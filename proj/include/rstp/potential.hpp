// Potentials of the form  c * psi + table[state][symbol],  psi = log |g'|.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rstp/geometry.hpp"

namespace rstp {

class Potential {
public:
    Potential() = default; // identically zero

    static Potential zero() { return {}; }
    static Potential psi(double coeff = 1.0);
    // table[state][symbol - 1]; missing entries count as 0
    static Potential table(std::vector<std::vector<double>> values);

    Potential scaled(double c) const;
    Potential operator+(const Potential& rhs) const;

    double psi_coeff() const noexcept { return psi_coeff_; }
    const std::vector<std::vector<double>>& table_values() const noexcept { return table_; }

    // value at the image point y in U^s (state, symbol)
    double evaluate(const MapFamily& maps, int state, int symbol, const Point& y) const;
    // independent of the point: no psi part, or psi itself is constant per symbol
    bool symbolwise(const MapFamily& maps) const noexcept { return psi_coeff_ == 0.0 || !maps.perturbed(); }
    // value for symbolwise potentials (y is ignored)
    double symbol_value(const MapFamily& maps, int state, int symbol) const;
    // inf and sup over U^s
    std::pair<double, double> bounds(const MapFamily& maps, int state, int symbol) const;

    std::string describe() const;

private:
    double table_at(int state, int symbol) const;

    double psi_coeff_ = 0.0;
    std::vector<std::vector<double>> table_;
};

} // namespace rstp
