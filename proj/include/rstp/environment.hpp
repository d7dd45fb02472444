// Finite ergodic base for the random subshift: an irreducible Markov chain whose
// states carry an alphabet size l and 0/1 transition matrices A towards each successor.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

namespace rstp {

// Dense 0/1 matrix, 0-based indices.
class BinaryMatrix {
public:
    BinaryMatrix() = default;
    BinaryMatrix(int rows, int cols, bool fill = false);
    static BinaryMatrix from_rows(const std::vector<std::vector<int>>& rows);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
    void set(int r, int c, bool value) { data_[static_cast<std::size_t>(r) * cols_ + c] = value ? 1 : 0; }

    // Boolean product (entry is 1 iff some path of positive entries exists).
    BinaryMatrix operator*(const BinaryMatrix& rhs) const;
    bool positive() const;

    friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> data_;
};

struct EnvState {
    int id = 0;
    int l = 1;
    // successor id -> A(state) of shape l(this) x l(successor)
    std::map<int, BinaryMatrix> a_to;
};

inline constexpr int kMaxAlphabet = 64;

class EnvironmentModel {
public:
    // Validates every invariant; throws NonStochasticMatrix, NotIrreducible or InvalidModel.
    EnvironmentModel(std::vector<EnvState> states, std::vector<std::vector<double>> markov,
                     int start_state = 0);

    // One state with alphabet l and matrix a (defaults to the full shift).
    static EnvironmentModel constant(int l, const BinaryMatrix& a);
    static EnvironmentModel full_shift(int l);

    std::size_t size() const noexcept { return states_.size(); }
    const EnvState& state(int id) const { return states_.at(static_cast<std::size_t>(id)); }
    const std::vector<EnvState>& states() const noexcept { return states_; }
    const std::vector<std::vector<double>>& markov() const noexcept { return markov_; }
    int start_state() const noexcept { return start_; }
    const BinaryMatrix& transition(int from, int to) const;

private:
    std::vector<EnvState> states_;
    std::vector<std::vector<double>> markov_;
    int start_ = 0;
};

// One realized orbit omega, sigma omega, ..., sigma^horizon omega.
struct OmegaPath {
    std::shared_ptr<const EnvironmentModel> model;
    std::vector<int> state_ids;

    std::size_t horizon() const noexcept { return state_ids.empty() ? 0 : state_ids.size() - 1; }
    int state(std::size_t k) const { return state_ids.at(k); }
    int alphabet(std::size_t k) const { return model->state(state(k)).l; }
    // A(sigma^k omega)
    const BinaryMatrix& transition(std::size_t k) const
    {
        return model->transition(state(k), state(k + 1));
    }
};

OmegaPath sample_environment_path(std::shared_ptr<const EnvironmentModel> model, std::uint64_t seed,
                                  std::size_t horizon);

std::vector<double> stationary_frequencies(const EnvironmentModel& model);

} // namespace rstp
