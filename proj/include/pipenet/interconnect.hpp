#pragma once

#include <limits>
#include <string>
#include <vector>

#include "pipenet/core.hpp"

namespace pipenet {

struct IndexRange {
  Eigen::Index begin = 0;
  Eigen::Index size = 0;
  Eigen::Index end() const { return begin + size; }
};

/// Block-diagonal aggregation of element models in declaration order.
struct StackedSystem {
  struct Block {
    std::string element;
    IndexRange states, inputs, outputs;
  };
  StateSpaceModel model;
  std::vector<Block> blocks;
};

/// Routing of component inputs:  w = F y + G u.
struct ConnectionMatrices {
  Eigen::MatrixXd F;  ///< component inputs x component outputs
  Eigen::MatrixXd G;  ///< component inputs x external inputs
  std::vector<std::string> external_names;
  std::vector<SignalLabel> external_targets;
};

/// Right flange of one element mated to the left flange of another.
struct PortLink {
  Port right;
  Port left;
};

/// Named external signal driving one component input.
struct ExternalInput {
  std::string name;
  SignalLabel target;
};

inline constexpr double kIllPosedCondition = 1e12;

struct NamedModel {
  std::string element;
  const StateSpaceModel* model;
};

inline StackedSystem stack(const std::vector<NamedModel>& parts) {
  if (parts.empty()) throw ConfigError("cannot stack an empty element list");
  Eigen::Index n = 0, m = 0, p = 0;
  for (const auto& part : parts) {
    part.model->validate();
    n += part.model->states();
    m += part.model->inputs();
    p += part.model->outputs();
  }
  StackedSystem out;
  StateSpaceModel& s = out.model;
  s.A = Eigen::MatrixXd::Zero(n, n);
  s.B = Eigen::MatrixXd::Zero(n, m);
  s.C = Eigen::MatrixXd::Zero(p, n);
  s.D = Eigen::MatrixXd::Zero(p, m);
  Eigen::Index i = 0, j = 0, k = 0;
  for (const auto& part : parts) {
    const StateSpaceModel& e = *part.model;
    const auto ni = e.states(), mi = e.inputs(), pi = e.outputs();
    s.A.block(i, i, ni, ni) = e.A;
    s.B.block(i, j, ni, mi) = e.B;
    s.C.block(k, i, pi, ni) = e.C;
    s.D.block(k, j, pi, mi) = e.D;
    out.blocks.push_back({part.element, {i, ni}, {j, mi}, {k, pi}});
    s.state_labels.insert(s.state_labels.end(), e.state_labels.begin(), e.state_labels.end());
    s.input_labels.insert(s.input_labels.end(), e.input_labels.begin(), e.input_labels.end());
    s.output_labels.insert(s.output_labels.end(), e.output_labels.begin(), e.output_labels.end());
    i += ni;
    j += mi;
    k += pi;
  }
  s.validate();  // rejects duplicate labels across elements
  return out;
}

/// Convenience overload for models whose element name is irrelevant.
inline StackedSystem stack(const std::vector<StateSpaceModel>& models) {
  std::vector<NamedModel> parts;
  parts.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) parts.push_back({"#" + std::to_string(i), &models[i]});
  return stack(parts);
}

inline ConnectionMatrices build_FG(const StackedSystem& stacked, const std::vector<PortLink>& links,
                                   const std::vector<ExternalInput>& externals) {
  const StateSpaceModel& s = stacked.model;
  const auto m = s.inputs(), p = s.outputs();
  const auto ne = static_cast<Eigen::Index>(externals.size());
  ConnectionMatrices conn;
  conn.F = Eigen::MatrixXd::Zero(m, p);
  conn.G = Eigen::MatrixXd::Zero(m, ne);
  std::vector<bool> driven(static_cast<std::size_t>(m), false);

  const auto input_row = [&](const SignalLabel& l) {
    const auto row = find_label(s.input_labels, l);
    if (row < 0) throw ConfigError("unknown component input " + l.str());
    if (driven[static_cast<std::size_t>(row)]) throw ConfigError("conflicting drivers for " + l.str());
    driven[static_cast<std::size_t>(row)] = true;
    return row;
  };
  const auto output_col = [&](const SignalLabel& l) {
    const auto col = find_label(s.output_labels, l);
    if (col < 0) throw ConfigError("unknown component output " + l.str());
    return col;
  };

  for (const auto& link : links) {
    if (link.right.flange != Side::right || link.left.flange != Side::left)
      throw ConfigError("incompatible flanges: " + link.right.output.element + " and " +
                        link.left.output.element);
    // Pressure travels downstream, flow answers upstream.
    conn.F(input_row(link.left.input), output_col(link.right.output)) = 1.0;
    conn.F(input_row(link.right.input), output_col(link.left.output)) = 1.0;
  }
  for (Eigen::Index k = 0; k < ne; ++k) {
    const auto& ext = externals[static_cast<std::size_t>(k)];
    conn.G(input_row(ext.target), k) = 1.0;
    conn.external_names.push_back(ext.name);
    conn.external_targets.push_back(ext.target);
  }
  for (Eigen::Index r = 0; r < m; ++r)
    if (!driven[static_cast<std::size_t>(r)])
      throw ConfigError("unconnected component input " + s.input_labels[static_cast<std::size_t>(r)].str());
  return conn;
}

namespace detail {

inline double condition_number(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Eliminates the internal signals. The result has the external inputs as inputs
/// (labelled by the component input each one drives) and every component output.
inline StateSpaceModel close(const StackedSystem& stacked, const ConnectionMatrices& conn) {
  const StateSpaceModel& s = stacked.model;
  const auto m = s.inputs();
  if (conn.F.rows() != m || conn.F.cols() != s.outputs() || conn.G.rows() != m)
    throw ConfigError("connection matrices do not match the stacked system");

  const Eigen::MatrixXd loop = Eigen::MatrixXd::Identity(s.outputs(), s.outputs()) - s.D * conn.F;
  if (!(detail::condition_number(loop) <= kIllPosedCondition))
    throw NumericalError("algebraic loop ill-posed");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(loop);
  const Eigen::MatrixXd loop_C = s.outputs() > 0 ? Eigen::MatrixXd(lu.solve(s.C)) : Eigen::MatrixXd(s.C);
  const Eigen::MatrixXd loop_D = s.outputs() > 0 ? Eigen::MatrixXd(lu.solve(s.D)) : Eigen::MatrixXd(s.D);

  StateSpaceModel out;
  out.A = s.A + s.B * conn.F * loop_C;
  out.B = s.B * (conn.G + conn.F * loop_D * conn.G);
  out.C = loop_C;
  out.D = loop_D * conn.G;
  out.state_labels = s.state_labels;
  out.output_labels = s.output_labels;
  out.input_labels.reserve(static_cast<std::size_t>(conn.G.cols()));
  for (Eigen::Index k = 0; k < conn.G.cols(); ++k) {
    Eigen::Index row = 0;
    conn.G.col(k).maxCoeff(&row);
    out.input_labels.push_back(s.input_labels[static_cast<std::size_t>(row)]);
  }
  return out;
}

/// Restricts and reorders the outputs.
inline StateSpaceModel select_outputs(const StateSpaceModel& model, const std::vector<SignalLabel>& labels) {
  StateSpaceModel out = model;
  out.C.resize(static_cast<Eigen::Index>(labels.size()), model.states());
  out.D.resize(static_cast<Eigen::Index>(labels.size()), model.inputs());
  out.output_labels = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = find_label(model.output_labels, labels[i]);
    if (row < 0) throw ConfigError("unknown output label " + labels[i].str());
    out.C.row(static_cast<Eigen::Index>(i)) = model.C.row(row);
    out.D.row(static_cast<Eigen::Index>(i)) = model.D.row(row);
  }
  return out;
}

}  // namespace pipenet
