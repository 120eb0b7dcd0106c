#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mlvsbm {

/// Thrown on malformed inputs (files, dimensions, flag values). CLI exit 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation cannot proceed numerically. CLI exit 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Level { ind, org };

/// Two-level network: an individual-level graph, an organization-level graph
/// and a one-hot affiliation of individuals to organizations.
///
/// Adjacency matrices are binary with a zero diagonal. Undirected levels are
/// stored as full symmetric matrices. Mask entries are 1 where the dyad is
/// observed; masked-out x entries are never read. Mask diagonals are kept at
/// zero (a node is not a dyad with itself).
struct MultilevelNetwork {
  Eigen::MatrixXd x_ind;        // n_ind x n_ind
  Eigen::MatrixXd x_org;        // n_org x n_org
  Eigen::MatrixXd affiliation;  // n_ind x n_org, one-hot rows
  bool directed_ind = false;
  bool directed_org = false;
  Eigen::MatrixXd mask_ind;
  Eigen::MatrixXd mask_org;

  int n_ind() const { return static_cast<int>(x_ind.rows()); }
  int n_org() const { return static_cast<int>(x_org.rows()); }

  const Eigen::MatrixXd& x(Level lv) const { return lv == Level::ind ? x_ind : x_org; }
  const Eigen::MatrixXd& mask(Level lv) const { return lv == Level::ind ? mask_ind : mask_org; }
  bool directed(Level lv) const { return lv == Level::ind ? directed_ind : directed_org; }

  /// Organization index of each individual (argmax of the affiliation row).
  std::vector<int> org_of() const;
};

/// All-observed network from adjacency + affiliation matrices.
MultilevelNetwork make_network(Eigen::MatrixXd x_ind, Eigen::MatrixXd x_org,
                               Eigen::MatrixXd affiliation, bool directed_ind,
                               bool directed_org);

struct Violation {
  std::string matrix;  // which matrix
  std::string where;   // index or row description
  std::string rule;    // violated rule
  std::string str() const { return matrix + " at " + where + ": " + rule; }
};

/// Reports every invariant violation; empty result means the network is valid.
std::vector<Violation> validate(const MultilevelNetwork& net);

/// Throws ValidationError listing the violations, if any.
void require_valid(const MultilevelNetwork& net);

struct NetworkStats {
  double density_ind = 0.0;  // observed edges / observed off-diagonal dyads
  double density_org = 0.0;
  Eigen::VectorXi org_sizes;
};

NetworkStats network_stats(const MultilevelNetwork& net);

enum class MaskMode { dyads, links };

/// A dyad is an unordered pair for undirected levels, an ordered pair for
/// directed ones. Pairs are stored with i<j when undirected.
using DyadList = std::vector<std::pair<int, int>>;

struct MaskResult {
  MultilevelNetwork net;
  DyadList held_out;  // dyads mode: masked dyads; links mode: removed edges
};

/// Hides part of one level. `dyads` mode marks floor(fraction * #observed
/// dyads) dyads as unobserved; `links` mode zeroes floor(fraction * #edges)
/// existing edges and reports them. fraction must be in [0,1) for dyads and
/// [0,1] for links (removing every link is meaningful, masking every dyad is
/// not).
MaskResult apply_mask(const MultilevelNetwork& net, Level level, double fraction,
                      MaskMode mode, std::uint64_t seed);

/// Same, with an explicit dyad set instead of a sampled one.
MaskResult apply_mask(const MultilevelNetwork& net, Level level,
                      const DyadList& dyads, MaskMode mode);

struct LoadOptions {
  int n_ind = 0;  // 0 = take from the affiliation file
  int n_org = 0;  // 0 = max org index + 1
  bool directed_ind = false;
  bool directed_org = false;
};

/// Reads the CSV triple (edge list per level + affiliation). Undirected
/// levels are symmetrized: one listed edge creates both entries.
MultilevelNetwork load_network(const std::string& edges_ind_path,
                               const std::string& edges_org_path,
                               const std::string& affiliation_path,
                               const LoadOptions& options);

/// Writes the CSV triple in canonical order (row-major, i<j once when
/// undirected). Masks are not representable in CSV; use the JSON bundle for
/// full fidelity.
void save_network(const MultilevelNetwork& net, const std::string& edges_ind_path,
                  const std::string& edges_org_path,
                  const std::string& affiliation_path);

}  // namespace mlvsbm
