#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rodctl/funcalg.hpp"
#include "rodctl/mesh.hpp"

namespace rodctl {

/// Dense numbering of the edge unknowns: waves first, then jump control maps u_{n,m}, n in J_x.
class UnknownSpace {
public:
    UnknownSpace() = default;
    explicit UnknownSpace(const MeshSpec& mesh) : mesh_(mesh) {}

    [[nodiscard]] int wave(int sign, int k, int m) const {
        return ((sign > 0 ? 0 : 1) * mesh_.N + mesh_.seg_pos(k)) * mesh_.wave_bands() + m;
    }
    [[nodiscard]] int control(int n, int m) const {
        return wave_count() + mesh_.iface_pos(n) * mesh_.control_bands() + m;
    }
    [[nodiscard]] int wave_count() const { return 2 * mesh_.N * mesh_.wave_bands(); }
    [[nodiscard]] int size() const { return wave_count() + (mesh_.N + 1) * mesh_.control_bands(); }
    [[nodiscard]] bool is_wave(int id) const { return id < wave_count(); }
    [[nodiscard]] int band(int id) const;
    [[nodiscard]] int parity(int id) const { return band(id) % 2; }
    [[nodiscard]] std::string name(int id) const;

    struct Decoded {
        bool wave;
        int sign;  // +1/-1 for waves, 0 for controls
        int index; // k for waves, n for controls
        int m;
    };
    [[nodiscard]] Decoded decode(int id) const;

    /// Parameters theta = (c1, gamma_k for k in J_s); gamma_k = u_k(T).
    [[nodiscard]] int param_count() const { return mesh_.N + 1; }
    [[nodiscard]] int gamma(int k) const { return 1 + mesh_.seg_pos(k); }

private:
    MeshSpec mesh_;
};

/// sum(terms) + data + params . theta, with data living on (0, tau_parity).
struct AffineExpr {
    int parity = 0;
    std::map<int, double> terms;
    Func1D data;
    std::vector<double> params;

    AffineExpr() = default;
    AffineExpr(int parity_, const MeshSpec& mesh, int nparams);

    void add(const AffineExpr& o, double s);
    [[nodiscard]] bool has_unknowns() const { return !terms.empty(); }
};

/// Equation "expr = 0" with its provenance label.
struct EdgeRow {
    std::string label;
    int step = 0;  // elimination stage 1..5
    AffineExpr expr;
};

struct FixedWave {
    int sign, k, m;
    AffineExpr value;  // no unknown terms
};

struct StateData {
    ScalarFn v0, r0, v1, p1;
};

struct EdgeData {
    std::vector<FixedWave> initial, terminal;
    double r0_left = 0.0, r0_right = 0.0;
    double p1_integral = 0.0;  // integral of p1 over [-1, 1]
    Func1D r1_base;            // r1(x) - c1 on [-1, 1]
};

[[nodiscard]] std::vector<FixedWave> initial_edges(const MeshSpec& mesh, const ScalarFn& v0, const ScalarFn& r0,
                                                   int degree);
/// Terminal waves; r1 = R1 + c1 with R1 the antiderivative of p1 from -1.
[[nodiscard]] std::vector<FixedWave> terminal_edges(const MeshSpec& mesh, const ScalarFn& v1, const Func1D& R1,
                                                    int degree);
[[nodiscard]] EdgeData prepare_edges(const MeshSpec& mesh, const StateData& data, int degree);

[[nodiscard]] std::vector<EdgeRow> assemble_edge_system(const MeshSpec& mesh, const EdgeData& edges);

enum class CatalogPolicy { corrected, as_written };

struct FreeVarCatalog {
    std::vector<int> y[2];  // unknown ids, parity 0 and 1
};

[[nodiscard]] FreeVarCatalog free_catalog(const MeshSpec& mesh, CatalogPolicy policy = CatalogPolicy::corrected);

/// w = A y + g + Theta theta for one parity block.
struct ParityBlock {
    std::vector<int> wave_ids;     // ordered per segment, band, then (+, -)
    std::vector<int> control_ids;  // u_{n,m} ordered per n, band
    Eigen::MatrixXd A, Theta;      // wave rows
    std::vector<Func1D> g;
    Eigen::MatrixXd Au, Thetau;    // control rows
    std::vector<Func1D> gu;
    std::vector<bool> plateau;     // wave row lies in a band with constant weight
};

struct LinearReduction {
    MeshSpec mesh;
    UnknownSpace space;
    FreeVarCatalog catalog;
    ParityBlock block[2];
    std::map<int, AffineExpr> expr;  // every unknown in terms of y and theta
    std::vector<std::string> log;    // resolution order: "step: unknown <- row"
    int pair_pivots = 0;
    int dense_fallbacks = 0;
};

struct EliminationOptions {
    CatalogPolicy policy = CatalogPolicy::corrected;
    std::optional<unsigned> shuffle_seed;  // permute row order before elimination
};

[[nodiscard]] LinearReduction eliminate(const MeshSpec& mesh, const std::vector<EdgeRow>& rows,
                                        const EliminationOptions& opts = {});

/// Max residual of every row after substituting random y and theta.
[[nodiscard]] double reduction_residual(const LinearReduction& red, const std::vector<EdgeRow>& rows,
                                        unsigned seed, int draws);

/// Vertex links: B1_i y_i(tau_i) - B0_{1-i} y_{1-i}(0) = b0_i + P_i theta.
struct VertexGroup {
    Eigen::MatrixXd B1;  // rows x |y_i|, multiplies y_i(tau_i)
    Eigen::MatrixXd B0;  // rows x |y_{1-i}|, multiplies y_{1-i}(0)
    Eigen::VectorXd b0;
    Eigen::MatrixXd P;   // rows x |theta|; column 0 is b1
    std::vector<std::string> labels;
    int listed_rows = 0;  // rows from the base link list; extras are terminal integral links
};

struct VertexSystem {
    VertexGroup group[2];
};

[[nodiscard]] VertexSystem vertex_system(const LinearReduction& red);

/// Residuals of the interelement v rows that involve only fixed waves when M = 1.
struct InfeasibilityReport {
    bool infeasible = false;
    double max_residual = 0.0;  // after removing the constant absorbed by terminal integrals
    std::vector<Func1D> residuals;
    std::vector<int> interfaces;
};

[[nodiscard]] InfeasibilityReport infeasibility_witness(const MeshSpec& mesh, const StateData& data, int degree,
                                                        double tol = 1e-8);

[[nodiscard]] std::string reduction_report(const LinearReduction& red);

}  // namespace rodctl
