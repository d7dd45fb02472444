#include "rstp/potential.hpp"

#include <algorithm>
#include <sstream>

namespace rstp {

Potential Potential::psi(double coeff)
{
    Potential p;
    p.psi_coeff_ = coeff;
    return p;
}

Potential Potential::table(std::vector<std::vector<double>> values)
{
    Potential p;
    p.table_ = std::move(values);
    return p;
}

Potential Potential::scaled(double c) const
{
    Potential p = *this;
    p.psi_coeff_ *= c;
    for (auto& row : p.table_)
        for (auto& v : row) v *= c;
    return p;
}

Potential Potential::operator+(const Potential& rhs) const
{
    Potential p;
    p.psi_coeff_ = psi_coeff_ + rhs.psi_coeff_;
    p.table_.resize(std::max(table_.size(), rhs.table_.size()));
    for (std::size_t i = 0; i < p.table_.size(); ++i) {
        const std::size_t a = i < table_.size() ? table_[i].size() : 0;
        const std::size_t b = i < rhs.table_.size() ? rhs.table_[i].size() : 0;
        p.table_[i].assign(std::max(a, b), 0.0);
        for (std::size_t s = 0; s < a; ++s) p.table_[i][s] += table_[i][s];
        for (std::size_t s = 0; s < b; ++s) p.table_[i][s] += rhs.table_[i][s];
    }
    return p;
}

double Potential::table_at(int state, int symbol) const
{
    const auto i = static_cast<std::size_t>(state);
    const auto s = static_cast<std::size_t>(symbol - 1);
    if (i >= table_.size() || s >= table_[i].size()) return 0.0;
    return table_[i][s];
}

double Potential::evaluate(const MapFamily& maps, int state, int symbol, const Point& y) const
{
    double v = table_at(state, symbol);
    if (psi_coeff_ != 0.0) v += psi_coeff_ * maps.log_derivative(state, symbol, y);
    return v;
}

double Potential::symbol_value(const MapFamily& maps, int state, int symbol) const
{
    double v = table_at(state, symbol);
    if (psi_coeff_ != 0.0) v += psi_coeff_ * maps.log_derivative_bounds(state, symbol).first;
    return v;
}

std::pair<double, double> Potential::bounds(const MapFamily& maps, int state, int symbol) const
{
    const double t = table_at(state, symbol);
    if (psi_coeff_ == 0.0) return {t, t};
    const auto [lo, hi] = maps.log_derivative_bounds(state, symbol);
    const double a = psi_coeff_ * lo;
    const double b = psi_coeff_ * hi;
    return {t + std::min(a, b), t + std::max(a, b)};
}

std::string Potential::describe() const
{
    std::ostringstream os;
    os << psi_coeff_ << "*psi";
    if (!table_.empty()) os << " + table";
    return os.str();
}

} // namespace rstp
