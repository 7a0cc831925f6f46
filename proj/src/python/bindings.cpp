// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "jgkd/cli/commands.hpp"
#include "jgkd/cli/selfcheck.hpp"
#include "jgkd/corpus/io.hpp"
#include "jgkd/errors.hpp"
#include "jgkd/losses/losses.hpp"
#include "jgkd/losses/oracle.hpp"

namespace py = pybind11;
using namespace jgkd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PyObject* g_error = nullptr;
PyObject* g_validation = nullptr;
PyObject* g_numeric = nullptr;
PyObject* g_io = nullptr;

PyObject* new_error(py::module_& m, const char* name, py::tuple bases) {
  const std::string full = std::string("jgkd._core.") + name;
  PyObject* cls = PyErr_NewException(full.c_str(), bases.ptr(), nullptr);
  if (!cls) throw py::error_already_set();
  m.add_object(name, py::handle(cls));
  return cls;
}

ad::Tensor to_tensor(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array, got " + std::to_string(a.ndim()) + " dims");
  const auto r = static_cast<std::size_t>(a.shape(0));
  const auto c = static_cast<std::size_t>(a.shape(1));
  return ad::Tensor({r, c}, std::vector<double>(a.data(), a.data() + r * c));
}

Array to_array(const ad::Shape& shape, const std::vector<double>& v) {
  Array out({shape.at(0), shape.at(1)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict level_dict(const harness::LevelMetrics& l, const corpus::Schema& schema) {
  py::dict d;
  d["micro_precision"] = l.micro_precision;
  d["micro_recall"] = l.micro_recall;
  d["micro_f1"] = l.micro_f1;
  py::dict labels;
  for (std::size_t i = 0; i < l.per_label.size(); ++i) {
    const auto& s = l.per_label[i];
    py::dict x;
    x["precision"] = s.precision;
    x["recall"] = s.recall;
    x["f1"] = s.f1;
    x["support"] = s.support;
    labels[py::str(schema.labels.at(i))] = x;
  }
  d["per_label"] = labels;
  return d;
}

py::dict metrics_dict(const harness::Metrics& m, corpus::SchemaId id) {
  const auto& schema = corpus::schema(id);
  py::dict d;
  d["token"] = level_dict(m.token, schema);
  d["entity"] = level_dict(m.entity, schema);
  return d;
}

// Runs a value-and-gradient computation with one leaf per input array.
template <typename F>
py::tuple value_and_grads(const std::vector<Array>& inputs, F build) {
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  for (const auto& a : inputs) leaves.push_back(tape.input(to_tensor(a)));
  const ad::Var loss = build(tape, leaves);
  tape.backward(loss);
  py::list grads;
  for (const auto& v : leaves) grads.append(to_array(v.shape(), tape.grad(v)));
  return py::make_tuple(loss.item(), py::tuple(grads));
}

std::vector<ad::Var> constants(ad::Tape& tape, const std::vector<Array>& arrays) {
  std::vector<ad::Var> out;
  for (const auto& a : arrays) out.push_back(tape.constant(to_tensor(a)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "jgkd native core";

  g_error = new_error(m, "Error", py::make_tuple(py::handle(PyExc_RuntimeError)));
  g_validation = new_error(m, "ValidationError", py::make_tuple(py::handle(g_error), py::handle(PyExc_ValueError)));
  g_numeric = new_error(m, "NumericError", py::make_tuple(py::handle(g_error), py::handle(PyExc_ArithmeticError)));
  g_io = new_error(m, "IoError", py::make_tuple(py::handle(g_error), py::handle(PyExc_OSError)));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyObject* cls = e.kind() == ErrorKind::kNumeric ? g_numeric : e.kind() == ErrorKind::kIo ? g_io : g_validation;
      PyErr_SetString(cls, e.what());
    }
  });

  py::class_<cli::RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("parse", &cli::RunConfig::parse, py::arg("text"))
      .def_static("load", &cli::RunConfig::load, py::arg("path"))
      .def("set", &cli::RunConfig::set, py::arg("key"), py::arg("value"))
      .def("get", &cli::RunConfig::get, py::arg("key"))
      .def("render", &cli::RunConfig::render)
      .def("validate", &cli::RunConfig::validate)
      .def("__getitem__", &cli::RunConfig::get)
      .def("__setitem__", &cli::RunConfig::set);

  m.def("config_keys", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& k : cli::config_keys()) out.emplace_back(k.name, k.default_value, k.help);
    return out;
  });

  m.def(
      "generate_pages",
      [](const cli::RunConfig& cfg) {
        std::vector<std::string> out;
        for (const auto& p : corpus::generate_corpus(cfg.gen_spec(), cfg.corpus_seed())) {
          out.push_back(corpus::page_to_json(p));
        }
        return out;
      },
      py::arg("config"), "Generated pages as JSON lines, before splitting.");

  m.def(
      "gen_data",
      [](const cli::RunConfig& cfg, const std::filesystem::path& out) {
        const auto s = cli::cmd_gen_data(cfg, out);
        return py::make_tuple(s.train.size(), s.val.size(), s.test.size());
      },
      py::arg("config"), py::arg("out"), "Writes the splits; returns (train, val, test) page counts.");

  m.def(
      "train_teachers",
      [](const cli::RunConfig& cfg, const std::filesystem::path& corpus, const std::filesystem::path& out) {
        std::ostringstream log;
        {
          py::gil_scoped_release release;
          cli::cmd_train_teachers(cfg, corpus, out, log);
        }
        return log.str();
      },
      py::arg("config"), py::arg("corpus"), py::arg("out"));

  m.def(
      "train_student",
      [](const cli::RunConfig& cfg, const std::filesystem::path& corpus, const std::filesystem::path& teachers,
         const std::filesystem::path& out) {
        std::ostringstream log;
        harness::Metrics m;
        {
          py::gil_scoped_release release;
          m = cli::cmd_train_student(cfg, corpus, teachers, out, log);
        }
        return metrics_dict(m, cfg.schema());
      },
      py::arg("config"), py::arg("corpus"), py::arg("teachers"), py::arg("out"));

  m.def(
      "evaluate",
      [](const cli::RunConfig& cfg, const std::filesystem::path& corpus, const std::filesystem::path& teachers,
         const std::filesystem::path& student, const std::string& split, const std::filesystem::path& out) {
        harness::Metrics m;
        {
          py::gil_scoped_release release;
          m = cli::cmd_eval(cfg, corpus, teachers, student, split, out);
        }
        return metrics_dict(m, cfg.schema());
      },
      py::arg("config"), py::arg("corpus"), py::arg("teachers"), py::arg("student"), py::arg("split") = "test",
      py::arg("out"));

  m.def(
      "ablate",
      [](const cli::RunConfig& cfg, const std::string& which, const std::filesystem::path& corpus,
         const std::filesystem::path& teachers, const std::filesystem::path& out) {
        std::ostringstream log;
        harness::AblationReport r;
        {
          py::gil_scoped_release release;
          r = cli::cmd_ablate(cfg, which, corpus, teachers, out, log);
        }
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict d;
          d["config"] = row.config;
          d["median"] = metrics_dict(row.median, r.schema);
          d["seeds"] = row.runs.size();
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("which"), py::arg("corpus") = std::filesystem::path(),
      py::arg("teachers") = std::filesystem::path(), py::arg("out"));

  m.def(
      "selfcheck",
      [](std::optional<std::string> defect, std::uint64_t seed) {
        std::vector<cli::CheckItem> items;
        {
          py::gil_scoped_release release;
          items = cli::run_selfcheck(seed, defect);
        }
        py::list out;
        for (const auto& it : items) {
          py::dict d;
          d["group"] = it.group;
          d["name"] = it.name;
          d["error"] = it.error;
          d["tol"] = it.tol;
          d["passed"] = it.passed;
          d["detail"] = it.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("inject_defect") = py::none(), py::arg("seed") = 1);

  m.def("loss_oracle_table", [] {
    std::vector<std::tuple<std::string, double, double, double>> out;
    for (const auto& c : losses::loss_oracle_table()) out.emplace_back(c.name, c.expected, c.actual, c.tol);
    return out;
  });

  m.def(
      "task_ce",
      [](const Array& logits, const std::vector<std::size_t>& labels) {
        return value_and_grads({logits}, [&](ad::Tape&, auto& v) { return losses::task_ce(v[0], labels); });
      },
      py::arg("logits"), py::arg("labels"), "Returns (loss, (d_logits,)).");

  m.def(
      "similarity_loss",
      [](const std::vector<Array>& teachers, const Array& student, bool raw_sum) {
        return value_and_grads({student}, [&](ad::Tape& t, auto& v) {
          const auto ts = constants(t, teachers);
          return losses::similarity_loss(ts, v[0], raw_sum);
        });
      },
      py::arg("teachers"), py::arg("student"), py::arg("raw_sum") = false, "Returns (loss, (d_student,)).");

  m.def(
      "distil_loss",
      [](const std::vector<Array>& teachers, const Array& student, bool raw_sum) {
        return value_and_grads({student}, [&](ad::Tape& t, auto& v) {
          const auto ts = constants(t, teachers);
          return losses::distil_loss(ts, v[0], raw_sum);
        });
      },
      py::arg("teachers"), py::arg("student"), py::arg("raw_sum") = false, "Returns (loss, (d_student,)).");

  m.def(
      "triplet_hinge",
      [](const Array& anchors, const Array& cand_a, const Array& cand_b, double margin) {
        return value_and_grads({anchors, cand_a, cand_b}, [&](ad::Tape&, auto& v) {
          return losses::triplet_hinge(v[0], v[1], v[2], margin);
        });
      },
      py::arg("anchors"), py::arg("cand_a"), py::arg("cand_b"), py::arg("margin"),
      "Returns (loss, (d_anchors, d_cand_a, d_cand_b)).");

  m.def(
      "alignment_loss",
      [](const Array& tokens, const Array& entities, const std::vector<std::size_t>& owners) {
        return value_and_grads({tokens, entities}, [&](ad::Tape&, auto& v) {
          return losses::alignment_loss(v[0], v[1], owners);
        });
      },
      py::arg("tokens"), py::arg("entities"), py::arg("owners"), "Returns (loss, (d_tokens, d_entities)).");
}
