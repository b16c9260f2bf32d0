#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polygrid/geometry.hpp"
#include "polygrid/solvers.hpp"

namespace polygrid {

enum class VertexOrder { Original, Rho, Averages, Measures };
enum class CutoffScheme { Single, Multiple };
enum class Task { Multiclass, Multilabel, LabelRanking };

std::string to_string(VertexOrder v);
std::string to_string(CutoffScheme c);
std::string to_string(Task t);
VertexOrder parse_vertex_order(const std::string& s);
CutoffScheme parse_cutoff(const std::string& s);
Task parse_task(const std::string& s);

struct PolygridConfig {
  int ns_per_domain = 1;
  int n_a = 1;
  VertexOrder vorder = VertexOrder::Rho;
  geom::SectorType sector = geom::SectorType::Miss;
  geom::AnnulusType annulus = geom::AnnulusType::SInvariant;
  solvers::SolverKind solver{};
  CutoffScheme cutoff = CutoffScheme::Single;
  /// Evenly spaced threshold candidates over [min(Yhat), max(Yhat)].
  int threshold_granularity = 101;
  int arc_resolution = 64;
  std::uint64_t seed = 0;

  bool operator==(const PolygridConfig&) const = default;
};

/// "(nspd, na, vorder, annulus, sector, solver, cutoff)" with abbreviated values.
std::string describe(const PolygridConfig& cfg);

nlohmann::json to_json(const PolygridConfig& cfg);
/// Fields missing from `j` keep the values already in `base`.
PolygridConfig config_from_json(const nlohmann::json& j, PolygridConfig base = {});

/// Axes of a hyperparameter grid. Configs are enumerated with the first axis
/// varying slowest, in the order the fields are declared.
struct GridSpec {
  std::vector<int> ns_per_domain{1, 2, 3};
  std::vector<int> n_a{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<VertexOrder> vorder{VertexOrder::Averages, VertexOrder::Rho, VertexOrder::Measures};
  std::vector<geom::AnnulusType> annulus{geom::AnnulusType::SInvariant,
                                         geom::AnnulusType::RInvariant, geom::AnnulusType::Tree};
  std::vector<geom::SectorType> sector{geom::SectorType::Cover, geom::SectorType::Miss};
  std::vector<solvers::SolverVariant> solver{
      solvers::SolverVariant::Lstsq, solvers::SolverVariant::LstsqSym,
      solvers::SolverVariant::LstsqUni, solvers::SolverVariant::Ridge};
  std::vector<CutoffScheme> cutoff{CutoffScheme::Single, CutoffScheme::Multiple};
  /// Settings shared by every enumerated config (granularity, ridge lambda, seed...).
  PolygridConfig base{};

  std::size_t size() const;
  PolygridConfig at(std::size_t index) const;
  std::vector<PolygridConfig> enumerate() const;
};

/// The full 3,456-config search space.
GridSpec default_grid();

nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

}  // namespace polygrid
