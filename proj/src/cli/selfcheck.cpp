// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/cli/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "jgkd/ad/grad_check.hpp"
#include "jgkd/ad/ops.hpp"
#include "jgkd/ad/primitive_cases.hpp"
#include "jgkd/errors.hpp"
#include "jgkd/losses/losses.hpp"
#include "jgkd/losses/oracle.hpp"

namespace jgkd::cli {

namespace {

using ad::Parameter;
using ad::Tape;
using ad::Var;

constexpr double kH = 1e-5;
constexpr double kTol = 1e-3;
constexpr int kTrials = 3;

struct DefectGuard {
  explicit DefectGuard(const std::optional<std::string>& op) {
    if (op) ad::set_backward_defect(*op, 2.0);
  }
  ~DefectGuard() { ad::set_backward_defect("", 1.0); }
};

void merge(CheckItem& item, const ad::GradCheckReport& r, const std::string& where) {
  if (r.max_rel_error >= item.error || !r.passed) {
    if (!r.passed || item.passed) item.detail = where + " worst " + r.worst_param + "[" + std::to_string(r.worst_index) + "]";
  }
  item.error = std::max(item.error, r.max_rel_error);
  item.passed = item.passed && r.passed;
}

// Random inputs for the loss checks: k tokens over n entities, C labels, width d.
struct LossCase {
  std::size_t k, n, C, d;
  std::vector<std::size_t> token_labels, entity_labels, owners;
  Parameter p_t, p_e, t, e, fine_a, fine_b, coarse_a, coarse_b;
  ad::Tensor tf1, tf2, tc1, tc2;
  double margin_fg = 1.0, margin_cg = 1.0;
};

// Distance gaps |d_a - d_b| per anchor row.
std::vector<double> gaps(const ad::Tensor& anchors, const ad::Tensor& a, const ad::Tensor& b) {
  std::vector<double> out;
  for (std::size_t r = 0; r < anchors.rows(); ++r) {
    double da = 0, db = 0;
    for (std::size_t c = 0; c < anchors.cols(); ++c) {
      da += (anchors.at(r, c) - a.at(r, c)) * (anchors.at(r, c) - a.at(r, c));
      db += (anchors.at(r, c) - b.at(r, c)) * (anchors.at(r, c) - b.at(r, c));
    }
    out.push_back(std::abs(std::sqrt(da) - std::sqrt(db)));
  }
  return out;
}

// A margin at least 0.05 away from every gap, so the hinge is differentiable
// at the check point and both active and inactive rows can occur.
double clear_margin(const std::vector<double>& g) {
  for (double m = 0.3;; m += 0.071) {
    if (std::all_of(g.begin(), g.end(), [&](double x) { return std::abs(x - m) > 0.05; })) return m;
  }
}

ad::Tensor gather(const ad::Tensor& x, const std::vector<std::size_t>& idx) {
  ad::Tensor out({idx.size(), x.cols()});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(idx[r], c);
  }
  return out;
}

LossCase make_case(Rng& rng) {
  while (true) {
    LossCase lc;
    lc.n = uniform_index(rng, 1, 3);
    lc.k = uniform_index(rng, std::max<std::size_t>(lc.n, 2), 6);
    lc.C = uniform_index(rng, 2, 4);
    lc.d = uniform_index(rng, 2, 8);
    for (std::size_t i = 0; i < lc.k; ++i) {
      lc.owners.push_back(i < lc.n ? i : uniform_index(rng, 0, lc.n - 1));
      lc.token_labels.push_back(uniform_index(rng, 0, lc.C - 1));
    }
    for (std::size_t j = 0; j < lc.n; ++j) lc.entity_labels.push_back(uniform_index(rng, 0, lc.C - 1));
    auto mat = [&](const char* name, std::size_t r, std::size_t c) {
      return Parameter{name, uniform_tensor(rng, {r, c}, -2, 2), {}};
    };
    lc.p_t = mat("token_logits", lc.k, lc.C);
    lc.p_e = mat("entity_logits", lc.n, lc.C);
    lc.t = mat("tokens", lc.k, lc.d);
    lc.e = mat("entities", lc.n, lc.d);
    lc.fine_a = mat("bridged_fine_a", lc.k, lc.d);
    lc.fine_b = mat("bridged_fine_b", lc.k, lc.d);
    lc.coarse_a = mat("bridged_coarse_a", lc.n, lc.d);
    lc.coarse_b = mat("bridged_coarse_b", lc.n, lc.d);
    lc.tf1 = uniform_tensor(rng, {lc.k, lc.C}, -2, 2);
    lc.tf2 = uniform_tensor(rng, {lc.k, lc.C}, -2, 2);
    lc.tc1 = uniform_tensor(rng, {lc.n, lc.C}, -2, 2);
    lc.tc2 = uniform_tensor(rng, {lc.n, lc.C}, -2, 2);

    const auto g_fg = gaps(gather(lc.e.value, lc.owners), lc.fine_a.value, lc.fine_b.value);
    const auto g_cg =
        gaps(lc.t.value, gather(lc.coarse_a.value, lc.owners), gather(lc.coarse_b.value, lc.owners));
    auto tied = [](const std::vector<double>& g) {
      return std::any_of(g.begin(), g.end(), [](double x) { return x < 0.05; });
    };
    if (tied(g_fg) || tied(g_cg)) continue;
    lc.margin_fg = clear_margin(g_fg);
    lc.margin_cg = clear_margin(g_cg);
    return lc;
  }
}

using LossFn = std::function<Var(Tape&, LossCase&)>;

struct LossEntry {
  const char* name;
  LossFn fn;
  std::vector<Parameter LossCase::*> params;
};

std::vector<LossEntry> loss_entries() {
  using L = LossCase;
  return {
      {"task_fine", [](Tape& t, L& c) { return losses::task_ce(t.param(c.p_t), c.token_labels); }, {&L::p_t}},
      {"task_coarse", [](Tape& t, L& c) { return losses::task_ce(t.param(c.p_e), c.entity_labels); }, {&L::p_e}},
      {"sim_fine",
       [](Tape& t, L& c) {
         const Var ts[] = {t.constant(c.tf1), t.constant(c.tf2)};
         return losses::similarity_loss(ts, t.param(c.p_t));
       },
       {&L::p_t}},
      {"sim_coarse",
       [](Tape& t, L& c) {
         const Var ts[] = {t.constant(c.tc1), t.constant(c.tc2)};
         return losses::similarity_loss(ts, t.param(c.p_e));
       },
       {&L::p_e}},
      {"distil_fine",
       [](Tape& t, L& c) {
         const Var ts[] = {t.constant(c.tf1), t.constant(c.tf2)};
         return losses::distil_loss(ts, t.param(c.p_t));
       },
       {&L::p_t}},
      {"distil_coarse",
       [](Tape& t, L& c) {
         const Var ts[] = {t.constant(c.tc1), t.constant(c.tc2)};
         return losses::distil_loss(ts, t.param(c.p_e));
       },
       {&L::p_e}},
      {"triplet_fg",
       [](Tape& t, L& c) {
         Rng r(0);
         const Var cs[] = {t.param(c.fine_a), t.param(c.fine_b)};
         return losses::triplet_fg(t.param(c.e), cs, c.owners, c.margin_fg, r);
       },
       {&L::e, &L::fine_a, &L::fine_b}},
      {"triplet_cg",
       [](Tape& t, L& c) {
         Rng r(0);
         const Var cs[] = {t.param(c.coarse_a), t.param(c.coarse_b)};
         return losses::triplet_cg(t.param(c.t), cs, c.owners, c.margin_cg, r);
       },
       {&L::t, &L::coarse_a, &L::coarse_b}},
      {"align", [](Tape& t, L& c) { return losses::alignment_loss(t.param(c.t), t.param(c.e), c.owners); },
       {&L::t, &L::e}},
  };
}

}  // namespace

std::vector<CheckItem> run_selfcheck(std::uint64_t seed, const std::optional<std::string>& defect) {
  if (defect) {
    const auto reg = ad::primitive_registry();
    if (std::find(reg.begin(), reg.end(), *defect) == reg.end()) {
      throw ValidationError("unknown primitive '" + *defect + "' for defect injection");
    }
  }
  DefectGuard guard(defect);
  std::vector<CheckItem> items;

  std::map<std::string, std::size_t> slot;
  for (auto name : ad::primitive_registry()) {
    slot[std::string(name)] = items.size();
    items.push_back({"primitive", std::string(name), 0, kTol, true, ""});
  }
  for (int trial = 0; trial < kTrials; ++trial) {
    for (auto& c : ad::primitive_grad_cases(derive_seed(seed, 0x5e1f + trial))) {
      CheckItem& item = items[slot.at(c.primitive)];
      try {
        merge(item, ad::grad_check([&](Tape& t) { return c.build(t, c.params); }, c.params, kH, kTol), c.name);
      } catch (const Error& e) {
        item.passed = false;
        item.detail = c.name + ": " + e.what();
      }
    }
  }

  const auto entries = loss_entries();
  const std::size_t first_loss = items.size();
  for (const auto& e : entries) items.push_back({"loss", e.name, 0, kTol, true, ""});
  Rng rng(derive_seed(seed, 0x1055));
  for (int trial = 0; trial < kTrials; ++trial) {
    LossCase lc = make_case(rng);
    const std::string where = "k=" + std::to_string(lc.k) + " n=" + std::to_string(lc.n) +
                              " C=" + std::to_string(lc.C) + " d=" + std::to_string(lc.d);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      CheckItem& item = items[first_loss + i];
      std::vector<Parameter*> ps;
      for (auto member : entries[i].params) ps.push_back(&(lc.*member));
      try {
        merge(item, ad::grad_check([&](Tape& t) { return entries[i].fn(t, lc); }, ps, kH, kTol), where);
      } catch (const Error& e) {
        item.passed = false;
        item.detail = where + ": " + e.what();
      }
    }
  }

  for (const auto& c : losses::loss_oracle_table()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "expected %.9g got %.9g", c.expected, c.actual);
    items.push_back({"oracle", c.name, std::abs(c.expected - c.actual), c.tol, c.passed(), buf});
  }
  return items;
}

bool report_selfcheck(const std::vector<CheckItem>& items, std::ostream& out) {
  std::size_t failed = 0;
  for (const auto& it : items) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", it.error);
    out << (it.passed ? "PASS " : "FAIL ") << it.group << "/" << it.name << " "
        << (it.group == "oracle" ? "abs_err=" : "max_rel_err=") << buf;
    if (!it.detail.empty()) out << " (" << it.detail << ")";
    out << "\n";
    if (!it.passed) ++failed;
  }
  out << (failed ? "selfcheck FAILED: " : "selfcheck passed: ") << items.size() - failed << "/" << items.size()
      << " items\n";
  return failed == 0;
}

}  // namespace jgkd::cli
