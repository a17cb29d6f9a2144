#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "qtraj/artifacts.hpp"
#include "qtraj/commands.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/lindblad.hpp"
#include "qtraj/observables.hpp"
#include "qtraj/reference.hpp"

namespace py = pybind11;
using namespace qtraj;

namespace {

using PyBasis = std::shared_ptr<FockBasis>;

Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::Open;
  if (s == "periodic") return Boundary::Periodic;
  throw InvalidArgument("boundary must be 'open' or 'periodic'");
}

SiteQuantity parse_quantity(const std::string& s) {
  if (s == "density") return SiteQuantity::Density;
  if (s == "magnetization") return SiteQuantity::Magnetization;
  throw InvalidArgument("quantity must be 'density' or 'magnetization'");
}

std::vector<std::uint8_t> to_occupation(const std::vector<int>& occ) {
  std::vector<std::uint8_t> out;
  for (int v : occ) {
    if (v < 0 || v > 255) throw InvalidArgument("occupation out of range");
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

// Runs a CLI command and returns (exit code, captured log).
std::pair<int, std::string> run_command(const std::function<int(std::ostream&)>& cmd) {
  std::ostringstream log;
  const int code = guarded([&] { return cmd(log); }, log);
  return {code, log.str()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantum-jump trajectories of lattice atoms under global light measurement";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DimensionCapExceeded>(m, "DimensionCapExceeded", PyExc_MemoryError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  py::class_<FockBasis, std::shared_ptr<FockBasis>>(m, "Basis")
      .def_static(
          "boson",
          [](int sites, int n, std::size_t cap) {
            return std::const_pointer_cast<FockBasis>(build_basis(Species::Boson, sites, ParticleContent::bosons(n), cap));
          },
          py::arg("sites"), py::arg("n"), py::arg("cap") = kTrajectoryDimensionCap)
      .def_static(
          "fermion",
          [](int sites, int up, int down, std::size_t cap) {
            return std::const_pointer_cast<FockBasis>(
                build_basis(Species::FermionSpinHalf, sites, ParticleContent::fermions(up, down), cap));
          },
          py::arg("sites"), py::arg("n_up"), py::arg("n_down"), py::arg("cap") = kTrajectoryDimensionCap)
      .def_property_readonly("dimension", &FockBasis::dimension)
      .def_property_readonly("sites", &FockBasis::sites)
      .def_property_readonly("modes", &FockBasis::modes)
      .def_property_readonly("particles", &FockBasis::particles)
      .def_property_readonly("is_fermionic", [](const FockBasis& b) { return b.species() == Species::FermionSpinHalf; })
      .def("state", [](const FockBasis& b, std::size_t k) {
        if (k >= b.dimension()) throw py::index_error("state index out of range");
        const auto s = b.state(k);
        return std::vector<int>(s.begin(), s.end());
      })
      .def("index", [](const FockBasis& b, const std::vector<int>& occ) { return b.index(to_occupation(occ)); })
      .def("__len__", &FockBasis::dimension);

  py::class_<LatticeSpec>(m, "Lattice")
      .def(py::init([](int sites, double J, double U, const std::string& boundary) {
             LatticeSpec l{sites, parse_boundary(boundary), J, U};
             l.validate();
             return l;
           }),
           py::arg("sites"), py::arg("J") = 1.0, py::arg("U") = 0.0, py::arg("boundary") = "open")
      .def_readonly("sites", &LatticeSpec::sites)
      .def_readonly("J", &LatticeSpec::J)
      .def_readonly("U", &LatticeSpec::U)
      .def("bonds", &LatticeSpec::bonds);

  py::class_<SparseOperator>(m, "Operator")
      .def_property_readonly("dimension", &SparseOperator::dimension)
      .def_property_readonly("is_hermitian", &SparseOperator::hermitian_flag)
      .def("dense", &SparseOperator::dense)
      .def("diagonal", &SparseOperator::diagonal)
      .def("apply", &SparseOperator::apply)
      .def("expectation", &SparseOperator::expectation)
      .def("adjoint", &SparseOperator::adjoint)
      .def("__add__", [](const SparseOperator& a, const SparseOperator& b) { return a + b; })
      .def("__sub__", [](const SparseOperator& a, const SparseOperator& b) { return a - b; })
      .def("__matmul__", [](const SparseOperator& a, const SparseOperator& b) { return a * b; })
      .def("__mul__", [](const SparseOperator& a, cplx s) { return a * s; })
      .def("__rmul__", [](const SparseOperator& a, cplx s) { return a * s; });

  py::class_<JumpChannel>(m, "Channel")
      .def_readonly("label", &JumpChannel::label)
      .def_readonly("op", &JumpChannel::op);

  m.def("hubbard", [](const PyBasis& b, const LatticeSpec& l) { return hubbard(b, l); }, py::arg("basis"), py::arg("lattice"),
        "Bose-Hubbard or (attractive for U > 0) Fermi-Hubbard Hamiltonian.");
  m.def("kinetic_op", [](const PyBasis& b, const LatticeSpec& l) { return kinetic_op(b, l); }, py::arg("basis"),
        py::arg("lattice"));
  m.def("number_op", [](const PyBasis& b, int site) { return number_op(b, site); }, py::arg("basis"), py::arg("site"));
  m.def(
      "ground_state",
      [](const SparseOperator& h) {
        const auto e = ground_state(h);
        return py::make_tuple(e.value, e.vector);
      },
      py::arg("h"));

  m.def("odd_sites_profile", &odd_sites_profile);
  m.def("alternating_profile", &alternating_profile);
  m.def("r_mode_profile", &r_mode_profile, py::arg("sites"), py::arg("modes"));
  m.def(
      "build_D",
      [](const PyBasis& b, const DiagonalProfile& p, const std::string& q) { return build_D(b, p, parse_quantity(q)); },
      py::arg("basis"), py::arg("profile"), py::arg("quantity") = "density");
  m.def(
      "build_B",
      [](const PyBasis& b, const LatticeSpec& lat, cplx value) {
        return build_B(b, InterSiteProfile::uniform(lat, value), lat);
      },
      py::arg("basis"), py::arg("lattice"), py::arg("value") = cplx(1.0));
  m.def("rayleigh_coefficient", &rayleigh_coefficient, py::arg("omega10"), py::arg("a0"), py::arg("delta_p"),
        py::arg("kappa"));
  m.def(
      "make_channel",
      [](const std::string& label, const SparseOperator& op, double gamma) {
        return make_channel(label, op, DirectGamma{gamma});
      },
      py::arg("label"), py::arg("op"), py::arg("gamma"));
  m.def("effective_hamiltonian", [](const SparseOperator& h0, const std::vector<JumpChannel>& ch) {
    return effective_hamiltonian(h0, ch);
  });

  m.def(
      "run_trajectory",
      [](const Vec& psi0, const SparseOperator& h0, const std::vector<JumpChannel>& channels, double t_final,
         double sample_interval, std::uint64_t seed, std::uint64_t traj_id, bool no_jump, double rtol, double atol,
         double dt_max) {
        EngineConfig cfg;
        cfg.t_final = t_final;
        cfg.sample_interval = sample_interval;
        cfg.seed = seed;
        cfg.rtol = rtol;
        cfg.atol = atol;
        cfg.dt_max = dt_max;
        std::vector<double> times;
        std::vector<Vec> states;
        TrajectoryResult res;
        {
          py::gil_scoped_release release;
          res = run_trajectory(psi0, h0, channels, cfg, traj_id,
                               [&](double t, const Vec& psi) {
                                 times.push_back(t);
                                 states.push_back(psi);
                               },
                               no_jump ? JumpMode::NoJump : JumpMode::Stochastic);
        }
        DenseMatrix mat(Eigen::Index(states.size()), psi0.size());
        for (std::size_t k = 0; k < states.size(); ++k) mat.row(Eigen::Index(k)) = states[k].transpose();
        py::list jumps;
        for (const auto& j : res.jumps) jumps.append(py::make_tuple(j.time, channels[j.channel].label));
        py::dict out;
        out["times"] = times;
        out["states"] = mat;
        out["jumps"] = jumps;
        return out;
      },
      py::arg("psi0"), py::arg("h0"), py::arg("channels"), py::arg("t_final"), py::arg("sample_interval"),
      py::arg("seed"), py::arg("traj_id") = 0, py::arg("no_jump") = false, py::arg("rtol") = 1e-8,
      py::arg("atol") = 1e-10, py::arg("dt_max") = 0.05,
      "One trajectory; returns times, normalised states (rows) and the jump log.");

  m.def(
      "lindblad",
      [](const DenseMatrix& rho0, const SparseOperator& h0, const std::vector<JumpChannel>& channels,
         const std::vector<double>& times) {
        py::gil_scoped_release release;
        return lindblad_evolve(rho0, h0, channels, times);
      },
      py::arg("rho0"), py::arg("h0"), py::arg("channels"), py::arg("times"));
  m.def("pure_density", &pure_density);
  m.def("trace_distance", &trace_distance);

  m.def("variance", &variance, py::arg("op"), py::arg("psi"));
  m.def(
      "mode_number_distribution",
      [](const Vec& psi, const FockBasis& b, const std::vector<int>& assignment, int mode) {
        return mode_number_distribution(psi, b, ModePartition::from_assignment(assignment), mode);
      },
      py::arg("psi"), py::arg("basis"), py::arg("assignment"), py::arg("mode"));
  m.def(
      "number_correlations",
      [](const Vec& psi, const FockBasis& b, const std::vector<int>& a, const std::vector<int>& c) {
        return number_correlations(psi, b, a, c);
      },
      py::arg("psi"), py::arg("basis"), py::arg("zone_a"), py::arg("zone_b"));
  m.def(
      "entanglement_entropy",
      [](const Vec& psi, const FockBasis& b, const std::vector<int>& sites) { return entanglement_entropy(psi, b, sites); },
      py::arg("psi"), py::arg("basis"), py::arg("sites"));
  m.def("site_densities", &site_densities, py::arg("psi"), py::arg("basis"));

  m.def("z0_between_jumps", &z0_between_jumps, py::arg("t"), py::arg("c0"), py::arg("z00"), py::arg("n"),
        py::arg("gamma"), py::arg("J"));
  m.def("z0_jump_envelope", &z0_jump_envelope, py::arg("t"), py::arg("z00"), py::arg("n"), py::arg("gamma"));
  m.def("sigma2_DeltaN", &sigma2_DeltaN, py::arg("J"), py::arg("U"), py::arg("gamma"), py::arg("sites"),
        py::arg("filling"));
  m.def("pair_correlation_law", &pair_correlation_law, py::arg("t"), py::arg("J"), py::arg("gamma"));
  m.def(
      "perturbed_mott_state",
      [](const PyBasis& b, const LatticeSpec& l, double gamma) { return perturbed_mott_state(b, l, gamma); },
      py::arg("basis"), py::arg("lattice"), py::arg("gamma"));
  m.def(
      "zeno_hamiltonian",
      [](const SparseOperator& h0, const DiagonalProfile& profile, double gamma, const Vec& psi0) {
        return zeno_hamiltonian(h0, profile, gamma, psi0);
      },
      py::arg("h0"), py::arg("profile"), py::arg("gamma"), py::arg("psi0"));

  m.def(
      "simulate",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
        SimulateOptions opt;
        opt.output_dir = std::move(out);
        py::gil_scoped_release release;
        return run_command([&](std::ostream& log) { return cmd_simulate(config, opt, log); });
      },
      py::arg("config"), py::arg("out") = py::none(), "Same as `qtraj simulate`; returns (exit code, log).");
  m.def(
      "master",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
        SimulateOptions opt;
        opt.output_dir = std::move(out);
        py::gil_scoped_release release;
        return run_command([&](std::ostream& log) { return cmd_master(config, opt, log); });
      },
      py::arg("config"), py::arg("out") = py::none());
  m.attr("SCHEMA_VERSION") = kSchemaVersion;
}
