#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crplus/analytics.hpp"
#include "crplus/engine.hpp"
#include "crplus/error.hpp"
#include "crplus/io.hpp"
#include "crplus/oracle.hpp"
#include "crplus/portfolio.hpp"

namespace py = pybind11;
using namespace crplus;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Poisson-gamma aggregate loss engine: banding, Panjer/FFT distributions, VaR allocation";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<ModelError>(m, "ModelError", base.ptr());

    py::class_<ObligorRecord>(m, "ObligorRecord")
        .def(py::init<>())
        .def_readwrite("id", &ObligorRecord::id)
        .def_readwrite("name", &ObligorRecord::name)
        .def_readwrite("exposure", &ObligorRecord::exposure)
        .def_readwrite("mean_loss_rate", &ObligorRecord::mean_loss_rate)
        .def_readwrite("loss_rate_stddev", &ObligorRecord::loss_rate_stddev)
        .def_readwrite("crop_ratio", &ObligorRecord::crop_ratio)
        .def_readwrite("livestock_ratio", &ObligorRecord::livestock_ratio)
        .def_readwrite("expected_loss_declared", &ObligorRecord::expected_loss_declared)
        .def_property_readonly("expected_loss", &ObligorRecord::expected_loss);

    py::class_<Portfolio>(m, "Portfolio")
        .def(py::init<>())
        .def_readwrite("obligors", &Portfolio::obligors)
        .def_readwrite("currency_unit", &Portfolio::currency_unit)
        .def_property_readonly("total_exposure", &Portfolio::total_exposure)
        .def_property_readonly("total_expected_loss", &Portfolio::total_expected_loss)
        .def("__len__", [](const Portfolio& p) { return p.obligors.size(); });

    py::class_<ValidationFinding>(m, "ValidationFinding")
        .def_readonly("obligor_id", &ValidationFinding::obligor_id)
        .def_property_readonly("kind", [](const ValidationFinding& f) { return to_string(f.kind); })
        .def_property_readonly("severity", [](const ValidationFinding& f) { return to_string(f.severity); })
        .def_readonly("observed", &ValidationFinding::observed)
        .def_readonly("expected", &ValidationFinding::expected)
        .def_readonly("message", &ValidationFinding::message);

    m.def("parse_portfolio", [](const std::string& text) { return parse_portfolio(text); }, py::arg("csv_text"));
    m.def("read_portfolio", [](const std::string& path) { return read_portfolio(path); }, py::arg("path"));
    m.def("serialize_portfolio", &serialize_portfolio);
    m.def("validate_portfolio", &validate_portfolio, py::arg("portfolio"),
          py::arg("tol") = kDefaultValidationTolerance);
    m.def(
        "discount_exposures",
        [](const Portfolio& p, double rate, double horizon) { return discount_exposures(p, {rate, horizon}); },
        py::arg("portfolio"), py::arg("rate"), py::arg("horizon"));

    py::class_<SectoredPortfolio>(m, "SectoredPortfolio")
        .def_property_readonly("sector_names",
                               [](const SectoredPortfolio& s) {
                                   std::vector<std::string> names;
                                   for (const auto& d : s.sectors) names.push_back(d.name);
                                   return names;
                               })
        .def_property_readonly("sub_exposures", [](const SectoredPortfolio& s) {
            py::list out;
            for (const auto& sub : s.sub_exposures) {
                out.append(py::make_tuple(s.portfolio.obligors[sub.obligor].id, s.sectors[sub.sector].name,
                                          sub.exposure, sub.loss_rate));
            }
            return out;
        });

    m.def(
        "assign_sectors",
        [](const Portfolio& p, const std::string& mode, const std::map<std::string, std::pair<double, double>>& rates) {
            SectorAssignment a;
            a.mode = parse_sector_mode(mode);
            for (const auto& [name, r] : rates) a.sector_rates[name] = {r.first, r.second};
            return assign_sectors(p, a);
        },
        py::arg("portfolio"), py::arg("mode") = "crop-livestock",
        py::arg("sector_rates") = std::map<std::string, std::pair<double, double>>{});

    py::class_<Band>(m, "Band")
        .def(py::init([](std::int64_t v, double epsilon) {
                 return Band{v, epsilon, epsilon / static_cast<double>(v)};
             }),
             py::arg("v"), py::arg("epsilon"))
        .def_readonly("v", &Band::v)
        .def_readonly("epsilon", &Band::epsilon)
        .def_readonly("mu", &Band::mu);

    py::class_<SectorParams>(m, "SectorParams")
        .def_readonly("mean_rate", &SectorParams::mean_rate)
        .def_readonly("rate_stddev", &SectorParams::rate_stddev)
        .def_readonly("mu", &SectorParams::mu)
        .def_readonly("sigma", &SectorParams::sigma)
        .def_readonly("alpha", &SectorParams::alpha)
        .def_readonly("beta", &SectorParams::beta)
        .def_readonly("rho", &SectorParams::rho);

    py::class_<BandedSector>(m, "BandedSector")
        .def_readonly("name", &BandedSector::name)
        .def_readonly("params", &BandedSector::params)
        .def_readonly("bands", &BandedSector::bands);

    py::class_<BandedPortfolio>(m, "BandedPortfolio")
        .def_readonly("unit", &BandedPortfolio::unit)
        .def_readonly("sectors", &BandedPortfolio::sectors)
        .def_property_readonly("max_v", &BandedPortfolio::max_v)
        .def_property_readonly("expected_loss", &BandedPortfolio::expected_loss)
        .def_property_readonly("variance", &BandedPortfolio::variance);

    m.def("band_exposures", &band_exposures, py::arg("sectored"), py::arg("unit") = 1.0);
    m.def("poisson_rate", py::overload_cast<const BandedPortfolio&>(&poisson_rate));
    m.def("severity_polynomial", [](const std::vector<Band>& bands) { return to_array(severity_polynomial(bands)); });

    py::class_<LossDistribution>(m, "LossDistribution")
        .def(py::init([](double unit, py::array_t<double> pmf) { return make_loss_distribution(unit, from_array(pmf)); }),
             py::arg("unit"), py::arg("pmf"))
        .def_readonly("unit", &LossDistribution::unit)
        .def_readonly("truncation_mass", &LossDistribution::truncation_mass)
        .def_property_readonly("pmf", [](const LossDistribution& d) { return to_array(d.pmf); })
        .def("__len__", &LossDistribution::size)
        .def("to_json", [](const LossDistribution& d) { return loss_distribution_json(d).dump(); });

    m.def("loss_dist_poisson", &loss_dist_poisson, py::arg("banded"), py::arg("grid_size"));
    m.def("loss_dist_sector", &loss_dist_sector, py::arg("banded"), py::arg("grid_size"));
    m.def("loss_dist_fft", &loss_dist_fft, py::arg("banded"), py::arg("grid_size"));
    m.def("convolve", &convolve);
    m.def("auto_grid_size", &auto_grid_size);
    m.def("total_variation", &total_variation);

    m.def("exceedance_quantile", &exceedance_quantile, py::arg("distribution"), py::arg("eps"));
    m.def("moments", [](const LossDistribution& d) {
        const auto mo = moments(d);
        return py::make_tuple(mo.mean, mo.variance);
    });
    m.def(
        "risk_contributions",
        [](const BandedPortfolio& b, const LossDistribution& d, const std::vector<double>& levels) {
            const auto t = risk_contributions(b, d, levels);
            py::dict out;
            for (const auto& row : t.rows) out[py::str(row.id)] = py::make_tuple(row.expected_loss, row.contributions);
            out["TOTAL"] = py::make_tuple(t.total.expected_loss, t.total.contributions);
            return out;
        },
        py::arg("banded"), py::arg("distribution"), py::arg("levels"));
    m.def(
        "build_report_json",
        [](const Portfolio& p, const BandedPortfolio& b, const LossDistribution& d, const std::vector<double>& levels) {
            return nlohmann::json(build_report(p, b, d, levels, RunInfo{}, validate_portfolio(p))).dump();
        },
        py::arg("portfolio"), py::arg("banded"), py::arg("distribution"), py::arg("levels") = kDefaultLevels);

    m.def(
        "simulate",
        [](const SectoredPortfolio& s, const BandedPortfolio& b, std::uint64_t n_draws, std::uint64_t seed,
           const std::string& mode) {
            py::gil_scoped_release release;
            const auto e = simulate(s, b, {n_draws, seed, parse_sim_mode(mode)});
            return std::make_pair(e.sample, e.clamp_count);
        },
        py::arg("sectored"), py::arg("banded"), py::arg("n_draws") = 100000, py::arg("seed") = 42,
        py::arg("mode") = "poisson-banded");
    m.def(
        "empirical_exceedance_quantile",
        [](std::vector<double> sample, double eps) {
            std::sort(sample.begin(), sample.end());
            EmpiricalDistribution e;
            e.n_draws = sample.size();
            e.sample = std::move(sample);
            return empirical_exceedance_quantile(e, eps);
        },
        py::arg("sample"), py::arg("eps"));

    m.attr("DEFAULT_LEVELS") = kDefaultLevels;
}
