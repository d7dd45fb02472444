#include "rstp/environment.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "rstp/error.hpp"

namespace rstp {

BinaryMatrix::BinaryMatrix(int rows, int cols, bool fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill ? 1 : 0)
{
}

BinaryMatrix BinaryMatrix::from_rows(const std::vector<std::vector<int>>& rows)
{
    if (rows.empty() || rows.front().empty())
        throw Error(ErrorKind::InvalidModel, "empty transition matrix");
    BinaryMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int r = 0; r < m.rows(); ++r) {
        if (static_cast<int>(rows[r].size()) != m.cols())
            throw Error(ErrorKind::InvalidModel, "ragged transition matrix");
        for (int c = 0; c < m.cols(); ++c) {
            const int v = rows[r][c];
            if (v != 0 && v != 1)
                throw Error(ErrorKind::InvalidModel, "transition matrix entries must be 0 or 1");
            m.set(r, c, v == 1);
        }
    }
    return m;
}

BinaryMatrix BinaryMatrix::operator*(const BinaryMatrix& rhs) const
{
    BinaryMatrix out(rows_, rhs.cols_);
    for (int r = 0; r < rows_; ++r)
        for (int k = 0; k < cols_; ++k)
            if (at(r, k))
                for (int c = 0; c < rhs.cols_; ++c)
                    if (rhs.at(k, c)) out.set(r, c, true);
    return out;
}

bool BinaryMatrix::positive() const
{
    for (auto v : data_)
        if (v == 0) return false;
    return !data_.empty();
}

namespace {

bool irreducible(const std::vector<std::vector<double>>& markov)
{
    const std::size_t n = markov.size();
    // strongly connected iff every state reaches every other state
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v)
                if (markov[u][v] > 0.0 && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
        }
        for (bool b : seen)
            if (!b) return false;
    }
    return true;
}

} // namespace

EnvironmentModel::EnvironmentModel(std::vector<EnvState> states, std::vector<std::vector<double>> markov,
                                   int start_state)
    : states_(std::move(states)), markov_(std::move(markov)), start_(start_state)
{
    const std::size_t n = states_.size();
    if (n == 0) throw Error(ErrorKind::InvalidModel, "environment has no states");
    if (markov_.size() != n) throw Error(ErrorKind::NonStochasticMatrix, "markov matrix has wrong row count");
    for (std::size_t i = 0; i < n; ++i) {
        if (markov_[i].size() != n)
            throw Error(ErrorKind::NonStochasticMatrix, "markov row " + std::to_string(i) + " has wrong length");
        double sum = 0.0;
        for (double p : markov_[i]) {
            if (!(p >= 0.0) || p > 1.0)
                throw Error(ErrorKind::NonStochasticMatrix,
                            "markov row " + std::to_string(i) + " has an entry outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw Error(ErrorKind::NonStochasticMatrix, "markov row " + std::to_string(i) + " does not sum to 1");
    }
    if (!irreducible(markov_)) throw Error(ErrorKind::NotIrreducible, "markov digraph is not strongly connected");
    if (start_ < 0 || static_cast<std::size_t>(start_) >= n)
        throw Error(ErrorKind::InvalidModel, "start state out of range");

    bool some_branching = false;
    for (std::size_t i = 0; i < n; ++i) {
        auto& st = states_[i];
        st.id = static_cast<int>(i);
        if (st.l < 1 || st.l > kMaxAlphabet)
            throw Error(ErrorKind::InvalidModel,
                        "state " + std::to_string(i) + ": alphabet size must lie in [1, " +
                            std::to_string(kMaxAlphabet) + "]");
        some_branching = some_branching || st.l >= 2;
    }
    if (!some_branching) throw Error(ErrorKind::InvalidModel, "at least one state needs l >= 2");

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (markov_[i][j] <= 0.0) continue;
            auto it = states_[i].a_to.find(static_cast<int>(j));
            const std::string edge = "state " + std::to_string(i) + " -> " + std::to_string(j);
            if (it == states_[i].a_to.end())
                throw Error(ErrorKind::InvalidModel, edge + ": missing transition matrix A");
            const auto& a = it->second;
            if (a.rows() != states_[i].l || a.cols() != states_[j].l) {
                std::ostringstream os;
                os << edge << ": A has shape " << a.rows() << "x" << a.cols() << ", expected " << states_[i].l
                   << "x" << states_[j].l;
                throw Error(ErrorKind::InvalidModel, os.str());
            }
            for (int r = 0; r < a.rows(); ++r) {
                bool any = false;
                for (int c = 0; c < a.cols(); ++c) any = any || a.at(r, c);
                if (!any)
                    throw Error(ErrorKind::InvalidModel, edge + ": A has a zero row " + std::to_string(r + 1));
            }
            for (int c = 0; c < a.cols(); ++c) {
                bool any = false;
                for (int r = 0; r < a.rows(); ++r) any = any || a.at(r, c);
                if (!any)
                    throw Error(ErrorKind::InvalidModel, edge + ": A has a zero column " + std::to_string(c + 1));
            }
        }
    }
}

EnvironmentModel EnvironmentModel::constant(int l, const BinaryMatrix& a)
{
    EnvState s;
    s.l = l;
    s.a_to.emplace(0, a);
    return EnvironmentModel({s}, {{1.0}});
}

EnvironmentModel EnvironmentModel::full_shift(int l) { return constant(l, BinaryMatrix(l, l, true)); }

const BinaryMatrix& EnvironmentModel::transition(int from, int to) const
{
    const auto& m = state(from).a_to;
    auto it = m.find(to);
    if (it == m.end())
        throw Error(ErrorKind::InvalidModel,
                    "no transition matrix for state " + std::to_string(from) + " -> " + std::to_string(to));
    return it->second;
}

OmegaPath sample_environment_path(std::shared_ptr<const EnvironmentModel> model, std::uint64_t seed,
                                  std::size_t horizon)
{
    if (!model) throw Error(ErrorKind::InvalidModel, "null environment model");
    if (horizon < 1) throw Error(ErrorKind::OutOfHorizon, "horizon must be at least 1");
    // mt19937_64 output is fully specified by the standard; the uniform draw is done by hand
    // so the path does not depend on library-specific distribution code.
    std::mt19937_64 gen(seed);
    OmegaPath path;
    path.state_ids.reserve(horizon + 1);
    int current = model->start_state();
    path.state_ids.push_back(current);
    const auto& markov = model->markov();
    for (std::size_t k = 0; k < horizon; ++k) {
        const auto& row = markov[static_cast<std::size_t>(current)];
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        double acc = 0.0;
        int next = -1;
        int last_positive = -1;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] <= 0.0) continue;
            last_positive = static_cast<int>(j);
            acc += row[j];
            if (u < acc) {
                next = static_cast<int>(j);
                break;
            }
        }
        if (next < 0) next = last_positive;
        current = next;
        path.state_ids.push_back(current);
    }
    path.model = std::move(model);
    return path;
}

std::vector<double> stationary_frequencies(const EnvironmentModel& model)
{
    const auto& m = model.markov();
    const auto n = static_cast<Eigen::Index>(m.size());
    if (!irreducible(m)) throw Error(ErrorKind::NotIrreducible, "markov digraph is not strongly connected");
    // pi (M - I) = 0 together with sum(pi) = 1, solved as an overdetermined system
    Eigen::MatrixXd sys(n + 1, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            sys(j, i) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - (i == j ? 1.0 : 0.0);
    sys.row(n).setOnes();
    rhs(n) = 1.0;
    Eigen::VectorXd pi = sys.colPivHouseholderQr().solve(rhs);
    std::vector<double> out(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
        sum += out[static_cast<std::size_t>(i)];
    }
    for (auto& p : out) p /= sum;
    return out;
}

} // namespace rstp
