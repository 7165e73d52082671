#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "windregime/dataset_io.hpp"
#include "windregime/diagnostics.hpp"
#include "windregime/error.hpp"
#include "windregime/pipeline.hpp"

namespace py = pybind11;
using namespace windregime;
using nlohmann::json;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// JSON crosses the boundary as text; the Python wrapper parses it.
json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

FeatureMatrix to_features(const DoubleArray& x)
{
    if (x.ndim() != 2) {
        throw ValidationError("features must be a 2-d array (n_samples, n_features)");
    }
    const auto n = static_cast<std::size_t>(x.shape(0));
    const auto d = static_cast<std::size_t>(x.shape(1));
    return FeatureMatrix(n, d, std::vector<double>(x.data(), x.data() + n * d));
}

GridSpec grid_of(const std::string& grid_json)
{
    return grid_from_json(parse(grid_json));
}

DoubleArray raster_array(const Raster& r)
{
    DoubleArray out({r.grid.n_lat, r.grid.n_lon});
    std::copy(r.values.begin(), r.values.end(), out.mutable_data());
    return out;
}

Raster raster_of(const DoubleArray& a, const GridSpec& g)
{
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != g.n_lat ||
        static_cast<std::size_t>(a.shape(1)) != g.n_lon) {
        throw ValidationError("raster shape does not match the grid");
    }
    return Raster{g, std::vector<double>(a.data(), a.data() + g.cells())};
}

py::tuple dataset_tuple(const WeatherDataset& ds)
{
    FloatArray data({ds.size(), ds.channels().size(), ds.grid().n_lat, ds.grid().n_lon});
    std::copy(ds.data().begin(), ds.data().end(), data.mutable_data());
    std::vector<std::string> times, channels;
    for (const auto& t : ds.times()) {
        times.push_back(format_timestamp(t));
    }
    for (const auto& c : ds.channels()) {
        channels.push_back(c.name);
    }
    return py::make_tuple(grid_to_json(ds.grid()).dump(), times, channels, data);
}

WeatherDataset dataset_of(const std::string& grid_json, const std::vector<std::string>& times,
                          const std::vector<std::string>& channels, const FloatArray& data)
{
    const GridSpec g = grid_of(grid_json);
    std::vector<Timestamp> ts;
    for (const auto& t : times) {
        ts.push_back(parse_timestamp(t));
    }
    std::vector<ChannelInfo> cs;
    for (const auto& c : channels) {
        cs.push_back({c, c == "msl" ? "Pa" : "m s-1"});
    }
    const auto n = static_cast<std::size_t>(data.size());
    return WeatherDataset(g, std::move(ts), std::move(cs), std::vector<float>(data.data(), data.data() + n));
}

} // namespace

PYBIND11_MODULE(_windregime, m)
{
    m.doc() = "Weather-regime clustering and wind-farm wake aggregation";

    static py::exception<Error> base(m, "WindregimeError");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<RangeError>(m, "RangeError", base.ptr());
    py::register_exception<DependencyError>(m, "DependencyError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<CorruptionError>(m, "CorruptionError", base.ptr());
    py::register_exception<LookupError>(m, "LookupError", base.ptr());

    m.def("read_dataset", [](const std::string& path) { return dataset_tuple(read_dataset(path)); });
    m.def("write_dataset",
          [](const std::string& grid, const std::vector<std::string>& times, const std::vector<std::string>& channels,
             const FloatArray& data, const std::string& path) {
              write_dataset(dataset_of(grid, times, channels, data), path);
          });
    m.def("generate_synthetic", [](const std::string& scenario_json) {
        const SyntheticScenario s = synthetic_scenario_from_json(parse(scenario_json));
        const SyntheticDataset syn = generate_synthetic(s.spec, s.n_days, s.grid);
        return py::make_tuple(dataset_tuple(syn.dataset), syn.labels);
    });

    m.def(
        "kmeans",
        [](const DoubleArray& x, std::size_t k, std::uint64_t seed, std::size_t n_init, std::size_t max_iter,
           double tol) {
            const FeatureMatrix f = to_features(x);
            py::gil_scoped_release release;
            return cluster_model_to_json(kmeans_fit(f, {k, seed, max_iter, tol, n_init})).dump();
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("n_init") = 10, py::arg("max_iter") = 300,
        py::arg("tol") = 1e-6);
    m.def(
        "elbow",
        [](const DoubleArray& x, const std::vector<std::size_t>& ks, std::uint64_t seed, std::size_t n_init) {
            const ElbowReport r = elbow_scan(to_features(x), ks, {1, seed, 300, 1e-6, n_init});
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict d;
                d["k"] = row.k;
                d["avg_distance"] = row.avg_distance;
                d["avg_correlation"] = row.avg_correlation;
                d["silhouette"] = row.silhouette ? py::cast(*row.silhouette) : py::none();
                d["inertia"] = row.inertia;
                rows.append(d);
            }
            return rows;
        },
        py::arg("x"), py::arg("k_values"), py::arg("seed") = 0, py::arg("n_init") = 10);
    m.def("silhouette", [](const DoubleArray& x, const std::vector<int>& labels, std::size_t k) {
        return silhouette_score(to_features(x), labels, k);
    });
    m.def("transition_matrix", [](const std::vector<int>& labels, const std::vector<std::string>& times, std::size_t k) {
        std::vector<Timestamp> ts;
        for (const auto& t : times) {
            ts.push_back(parse_timestamp(t));
        }
        const TransitionMatrix tm = transition_matrix(labels, ts, k);
        DoubleArray p({k, k});
        std::copy(tm.probabilities.begin(), tm.probabilities.end(), p.mutable_data());
        return p;
    });

    m.def("power_curve", [](double v) { return power_curve(default_turbine(), v); });
    m.def("thrust_coefficient", [](double v) { return thrust_coefficient(default_turbine(), v); });
    m.def("fitch_drag", [](double u, double v) {
        const Vec2 f = fitch_drag(default_turbine(), {u, v});
        return py::make_tuple(f.x, f.y);
    });
    m.def(
        "default_farm", [](double lat, double lon) { return farm_to_json(default_farm({lat, lon})).dump(); },
        py::arg("lat") = 56.0, py::arg("lon") = 3.0);

    m.def(
        "jensen_simulate",
        [](const DoubleArray& u, const DoubleArray& v, const std::string& grid_json, const std::string& farm_json,
           double k_wake, std::size_t samples_per_cell) {
            const GridSpec g = grid_of(grid_json);
            const Raster ru = raster_of(u, g), rv = raster_of(v, g);
            std::vector<float> values;
            for (double x : ru.values) {
                values.push_back(static_cast<float>(x));
            }
            for (double x : rv.values) {
                values.push_back(static_cast<float>(x));
            }
            const InflowCondition inflow(GriddedField(g, Timestamp{}, {{"u100", "m s-1"}, {"v100", "m s-1"}}, values));
            const FarmSpec farm = farm_from_json(parse(farm_json));
            WakeResult r = [&] {
                py::gil_scoped_release release;
                return jensen_simulate(inflow, farm, {k_wake, samples_per_cell});
            }();
            return py::make_tuple(raster_array(Raster::from_field(r.deficit)), r.farm_power, r.per_turbine_power,
                                  r.per_turbine_speed);
        },
        py::arg("u"), py::arg("v"), py::arg("grid"), py::arg("farm"), py::arg("k_wake") = 0.05,
        py::arg("samples_per_cell") = 8);
    m.def("rotate_wake",
          [](const DoubleArray& w, const std::string& grid_json, double dtheta, double lat, double lon) {
              const GridSpec g = grid_of(grid_json);
              return raster_array(rotate_wake(raster_of(w, g), dtheta, {lat, lon}));
          });

    m.def(
        "run_pipeline",
        [](const std::string& config_json, const std::string& base_dir, const std::string& out_dir, bool validate) {
            const RunConfig c = run_config_from_json(parse(config_json), base_dir);
            if (!c.dataset) {
                if (!c.synthetic) {
                    throw ValidationError("config needs a dataset or a synthetic scenario");
                }
                const auto& s = *c.synthetic;
                write_dataset(generate_synthetic(s.spec, s.n_days, s.grid).dataset,
                              std::filesystem::path(out_dir) / "dataset");
            }
            const WeatherDataset ds = load_dataset(c, out_dir);
            const FarmSpec farm = resolve_farm(c, ds.grid());
            const auto solver = make_solver(c);
            py::gil_scoped_release release;
            const PipelineResult p = run_cluster_pipeline(ds, c, farm, *solver);
            json out{{"model", cluster_model_to_json(p.model)},
                     {"solver_runs", p.solver_runs},
                     {"simple", prediction_summary_json(p.simple)},
                     {"complex", prediction_summary_json(p.complex)}};
            if (validate) {
                const ValidationOutcome v = run_validation(ds, c, farm, *solver, p);
                out["oracle_runs"] = v.oracle.solver_runs;
                out["oracle_total_power"] = v.oracle.total_power;
                out["report_simple"] = report_to_json(v.simple);
                out["report_complex"] = report_to_json(v.complex);
                if (v.feedback) {
                    out["feedback"] = feedback_to_json(*v.feedback);
                }
            }
            return out.dump();
        },
        py::arg("config"), py::arg("base_dir"), py::arg("out_dir"), py::arg("validate") = true);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"windregime-cli"};
        for (const auto& a : args) {
            argv.push_back(a.c_str());
        }
        return cli::run_cli(static_cast<int>(argv.size()), argv.data());
    });
}
