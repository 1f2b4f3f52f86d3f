#include "motsp/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>

#include "CLI11.hpp"
#include "motsp/baselines.hpp"
#include "motsp/hypervolume.hpp"
#include "motsp/instance_io.hpp"
#include "motsp/trainer.hpp"
#include "motsp/tsplib.hpp"

namespace motsp {

namespace {

double round_tenths(double seconds) { return std::round(seconds * 10.0) / 10.0; }

std::string fmt_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void require_file(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path))
        throw ConfigError(what + " '" + path + "' does not exist");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct BenchmarkCell {
    std::string algorithm;
    ParetoArchive archive;
    double seconds = 0.0;
    nlohmann::json params;
};

struct BenchOptions {
    std::uint64_t seed = 1;
    int nsga2_pop = 100;
    int nsga2_iters = 500;
    int moead_n = 100;
    int moead_iters = 500;
    int moead_tnbr = 10;
    int mogls_gens = 200;
    long mogls_nls = 100;
    int mogls_init = 50;
    int mogls_temp = 20;
    double p_mut = 0.2;
    long ls_budget = kTwoOptConverge;
};

BenchmarkCell run_cell(const std::string& algo, const Instance& inst, const ModelBank* bank,
                       const BenchOptions& opt) {
    BenchmarkCell cell;
    cell.algorithm = algo;
    Stopwatch timer;
    if (algo == "drlmoa" || algo == "drlmoa-ls") {
        if (!bank) throw ConfigError("algorithm '" + algo + "' requires --bank");
        cell.archive = infer_front(*bank, inst);
        if (algo == "drlmoa-ls") {
            std::vector<WeightVector> grid;
            for (const auto& m : bank->models) grid.push_back(m.lambda);
            cell.archive = ls_postprocess(inst, cell.archive, grid, opt.ls_budget);
        }
        cell.params = {{"N", static_cast<int>(bank->models.size())}, {"d_h", bank->config.d_h}};
        if (algo == "drlmoa-ls") cell.params["ls_budget"] = opt.ls_budget;
    } else if (algo == "nsga2") {
        Rng rng(mix_seed(opt.seed, 11));
        cell.archive = nsga2_run(inst, opt.nsga2_pop, opt.nsga2_iters, rng, opt.p_mut);
        cell.params = {{"pop", opt.nsga2_pop}, {"iters", opt.nsga2_iters}, {"p_mut", opt.p_mut}};
    } else if (algo == "moead") {
        Rng rng(mix_seed(opt.seed, 13));
        cell.archive = moead_run(inst, opt.moead_n, opt.moead_iters, opt.moead_tnbr, rng, opt.p_mut);
        cell.params = {{"N", opt.moead_n}, {"iters", opt.moead_iters}, {"T_nbr", opt.moead_tnbr}};
    } else if (algo == "mogls") {
        Rng rng(mix_seed(opt.seed, 17));
        MOGLSConfig cfg;
        cfg.n_ls = opt.mogls_nls;
        cfg.temp_pop = opt.mogls_temp;
        cfg.initial = opt.mogls_init;
        cfg.generations = opt.mogls_gens;
        cell.archive = mogls_run(inst, cfg, rng);
        cell.params = {{"N_LS", cfg.n_ls},
                       {"temp_pop", cfg.temp_pop},
                       {"initial", cfg.initial},
                       {"generations", cfg.generations}};
    } else {
        throw ConfigError("unknown algorithm '" + algo +
                          "' (expected drlmoa, drlmoa-ls, nsga2, moead or mogls)");
    }
    cell.seconds = timer.seconds();
    return cell;
}

FrontRecord record_from_cell(const BenchmarkCell& cell, const std::string& instance_id,
                             std::uint64_t seed, double scale, const ObjectiveVector& ref) {
    FrontRecord rec;
    rec.instance_id = instance_id;
    rec.algorithm = cell.algorithm;
    rec.seed = seed;
    rec.params = cell.params;
    rec.scale = scale;
    for (const ArchiveEntry& e : cell.archive.entries) {
        rec.tours.push_back(e.tour);
        rec.objectives.push_back(e.objectives);
    }
    HvResult hv = hypervolume(rec.objectives, ref);
    rec.hv = hv.value;
    rec.hv_ref = ref;
    rec.hv_method = hv.method;
    rec.wall_clock_seconds = round_tenths(cell.seconds);
    return rec;
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

ObjectiveVector parse_ref(const std::string& s) {
    ObjectiveVector ref;
    for (const std::string& part : split_csv_list(s)) ref.push_back(std::stod(part));
    if (ref.size() < 2) throw ConfigError("--ref needs at least two comma-separated values");
    return ref;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_gen(const std::string& family, int n, std::uint64_t seed, const std::string& out) {
    Instance inst = gen_instance(family, n, seed);
    save_instance(out, inst);
    std::cout << "wrote " << out << " (family=" << family << " n=" << n << " M=" << inst.M << ")\n";
    return 0;
}

int cmd_train(TrainConfig config, const std::string& out, const std::string& log_path) {
    config.validate();
    std::ofstream log;
    if (!log_path.empty()) {
        log.open(log_path);
        if (!log) throw IoError("cannot open log file '" + log_path + "'");
    }
    ProgressFn progress = [&](const TrainLogEntry& e) {
        if (!log.is_open()) return;
        nlohmann::json j = {{"subproblem", e.subproblem},
                            {"iteration", e.iteration},
                            {"mean_reward", e.mean_reward},
                            {"critic_loss", e.critic_loss}};
        log << j.dump() << "\n";
    };
    ModelBank bank = train_drlmoa(config, progress);
    save_model_bank(out, bank);
    std::cout << "trained " << bank.models.size() << " subproblems (" << config.total_iterations()
              << " iterations total) -> " << out << "\n";
    return 0;
}

int cmd_solve(const std::string& bank_dir, const std::string& instance_path, const std::string& out,
              bool with_ls, long ls_budget, std::uint64_t seed) {
    require_file(bank_dir + "/manifest.json", "bank manifest");
    require_file(instance_path, "instance");
    ModelBank bank = load_model_bank(bank_dir);
    Instance raw = load_instance(instance_path);
    Instance inst = normalize_instance(raw);

    Stopwatch timer;
    ParetoArchive archive = infer_front(bank, inst);
    if (with_ls) {
        std::vector<WeightVector> grid;
        for (const auto& m : bank.models) grid.push_back(m.lambda);
        archive = ls_postprocess(inst, archive, grid, ls_budget);
    }
    double seconds = timer.seconds();

    FrontRecord rec;
    rec.instance_id = std::filesystem::path(instance_path).filename().string();
    rec.algorithm = with_ls ? "drlmoa-ls" : "drlmoa";
    rec.seed = seed;
    rec.params = {{"N", static_cast<int>(bank.models.size())}, {"d_h", bank.config.d_h}};
    rec.scale = inst.scale;
    for (const ArchiveEntry& e : archive.entries) {
        rec.tours.push_back(e.tour);
        rec.objectives.push_back(e.objectives);
    }
    ObjectiveVector ref = hv_reference({rec.objectives});
    HvResult hv = hypervolume(rec.objectives, ref);
    rec.hv = hv.value;
    rec.hv_ref = ref;
    rec.hv_method = hv.method;
    rec.wall_clock_seconds = round_tenths(seconds);
    save_front_record(out, rec);
    std::cout << "front size " << rec.objectives.size() << ", HV " << rec.hv << " (" << rec.hv_method
              << "), " << rec.wall_clock_seconds << " s -> " << out << "\n";
    return 0;
}

int cmd_benchmark(const std::string& instance_path, const std::string& family, int n,
                  const std::string& algos_csv, const std::string& bank_dir, const std::string& out_dir,
                  const BenchOptions& opt, int workers) {
    Instance raw;
    std::string instance_id;
    if (!instance_path.empty()) {
        require_file(instance_path, "instance");
        raw = load_instance(instance_path);
        instance_id = std::filesystem::path(instance_path).filename().string();
    } else {
        raw = gen_instance(family, n, opt.seed);
        instance_id = family + "-" + std::to_string(n) + "-s" + std::to_string(opt.seed);
    }
    Instance inst = normalize_instance(raw);

    std::vector<std::string> algos = split_csv_list(algos_csv);
    if (algos.empty()) throw ConfigError("--algos is empty");
    ModelBank bank;
    bool bank_loaded = false;
    for (const std::string& a : algos)
        if (a == "drlmoa" || a == "drlmoa-ls") {
            if (bank_dir.empty()) throw ConfigError("algorithm '" + a + "' requires --bank");
            if (!bank_loaded) {
                require_file(bank_dir + "/manifest.json", "bank manifest");
                bank = load_model_bank(bank_dir);
                bank_loaded = true;
            }
        }

    std::vector<BenchmarkCell> cells(algos.size());
    if (workers > 1) {
        std::vector<std::future<BenchmarkCell>> futures;
        for (const std::string& a : algos)
            futures.push_back(std::async(std::launch::async, [&, a] {
                return run_cell(a, inst, bank_loaded ? &bank : nullptr, opt);
            }));
        for (size_t i = 0; i < futures.size(); ++i) cells[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < algos.size(); ++i)
            cells[i] = run_cell(algos[i], inst, bank_loaded ? &bank : nullptr, opt);
    }

    // one shared reference point across all compared fronts
    std::vector<std::vector<ObjectiveVector>> fronts;
    for (const BenchmarkCell& c : cells) {
        std::vector<ObjectiveVector> f;
        for (const ArchiveEntry& e : c.archive.entries) f.push_back(e.objectives);
        fronts.push_back(std::move(f));
    }
    ObjectiveVector ref = hv_reference(fronts);

    std::filesystem::create_directories(out_dir);
    std::ostringstream table;
    table << "algorithm,hv,hv_method,front_size,wall_clock_seconds\n";
    std::cout << "instance " << instance_id << ", shared HV reference point: [";
    for (size_t k = 0; k < ref.size(); ++k) std::cout << (k ? ", " : "") << ref[k];
    std::cout << "]\n";
    for (const BenchmarkCell& cell : cells) {
        FrontRecord rec = record_from_cell(cell, instance_id, opt.seed, inst.scale, ref);
        save_front_record(std::filesystem::path(out_dir) / (cell.algorithm + ".json"), rec);
        table << cell.algorithm << "," << fmt_double(rec.hv) << "," << rec.hv_method << ","
              << rec.objectives.size() << "," << rec.wall_clock_seconds << "\n";
        std::cout << "  " << cell.algorithm << ": HV " << rec.hv << " (" << rec.hv_method << "), front "
                  << rec.objectives.size() << ", " << rec.wall_clock_seconds << " s\n";
    }
    std::ofstream summary(std::filesystem::path(out_dir) / "summary.csv");
    if (!summary) throw IoError("cannot write benchmark summary in '" + out_dir + "'");
    summary << table.str();
    return 0;
}

int cmd_hv(const std::string& front_path, const std::string& ref_str) {
    require_file(front_path, "front record");
    FrontRecord rec = load_front_record(front_path);
    ObjectiveVector ref = ref_str.empty() ? rec.hv_ref : parse_ref(ref_str);
    if (ref.empty()) throw ConfigError("front record has no stored reference; pass --ref");
    HvResult hv = hypervolume(rec.objectives, ref);
    std::cout.precision(17);
    std::cout << hv.value << " (" << hv.method << ")\n";
    return 0;
}

int cmd_export(const std::string& front_path, const std::string& format, const std::string& out) {
    require_file(front_path, "front record");
    FrontRecord rec = load_front_record(front_path);
    if (format == "json") {
        std::ofstream o(out);
        if (!o) throw IoError("cannot write '" + out + "'");
        o << front_record_to_json(rec).dump(2) << "\n";
    } else if (format == "csv") {
        CsvExport e = export_front_csv(rec);
        std::ofstream o(out);
        if (!o) throw IoError("cannot write '" + out + "'");
        o << e.csv;
        std::ofstream meta(out + ".meta.json");
        if (!meta) throw IoError("cannot write '" + out + ".meta.json'");
        meta << e.sidecar_json;
    } else {
        throw ConfigError("unknown export format '" + format + "' (csv or json)");
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_kroab(const std::string& a_path, const std::string& b_path, const std::string& out) {
    require_file(a_path, "tsplib file");
    require_file(b_path, "tsplib file");
    TsplibFile a = parse_tsplib(read_file(a_path));
    TsplibFile b = parse_tsplib(read_file(b_path));
    Instance inst = make_kroab(a, b);
    save_instance(out, inst);
    std::cout << "wrote " << out << " (n=" << inst.n << ", raw scale)\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"DRL-MOA multi-objective TSP toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random instance file");
    std::string gen_family = "euclidean", gen_out;
    int gen_n = 40;
    std::uint64_t gen_seed = 1;
    int gen_workers = 1;
    gen->add_option("--family", gen_family, "euclidean | mixed | 3obj | 5obj");
    gen->add_option("--n", gen_n, "city count")->required();
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--workers", gen_workers, "worker count (instance generation is single-threaded)");
    gen->add_option("--out", gen_out, "output instance JSON")->required();

    // train
    auto* train = app.add_subcommand("train", "train a DRL-MOA model bank");
    TrainConfig tc;
    std::string train_out, train_log;
    bool no_transfer = false;
    int train_workers = 1;
    train->add_option("--family", tc.family, "instance family");
    train->add_option("--n-train", tc.n_train, "training city count");
    train->add_option("--subproblems", tc.subproblems, "number of scalarized subproblems (N)");
    train->add_option("--batch", tc.batch, "batch size (T)");
    train->add_option("--lr", tc.lr, "Adam learning rate");
    train->add_option("--epochs", tc.epochs, "training epochs");
    train->add_option("--instances-per-epoch", tc.instances_per_epoch, "instances per epoch");
    train->add_option("--iters-total", tc.iterations_override,
                      "total iterations across subproblems (overrides epochs)");
    train->add_option("--d-h", tc.d_h, "hidden size");
    train->add_option("--seed", tc.seed, "rng seed");
    train->add_option("--warm-share", tc.warm_share, "budget share of the first subproblem");
    train->add_flag("--no-transfer", no_transfer, "disable neighborhood parameter transfer");
    train->add_flag("--whiten", tc.whiten, "whiten advantages");
    train->add_option("--grad-clip", tc.grad_clip, "global-norm gradient clip (0 = off)");
    train->add_option("--first-city", tc.first_city, "fixed first city index");
    train->add_flag("--random-first-city", tc.random_first_city, "randomize the first city during training");
    train->add_option("--workers", train_workers, "worker count (training runs single-worker for reproducibility)");
    train->add_option("--out", train_out, "output bank directory")->required();
    train->add_option("--log", train_log, "JSONL progress log path");

    // solve
    auto* solve = app.add_subcommand("solve", "run a trained bank on one instance");
    std::string solve_bank, solve_instance, solve_out;
    bool solve_ls = false;
    long solve_ls_budget = kTwoOptConverge;
    std::uint64_t solve_seed = 1;
    int solve_workers = 1;
    solve->add_option("--bank", solve_bank, "model bank directory")->required();
    solve->add_option("--instance", solve_instance, "instance JSON")->required();
    solve->add_option("--out", solve_out, "output front record JSON")->required();
    solve->add_flag("--ls", solve_ls, "post-process the front with 2-opt (DRL-MOA+LS)");
    solve->add_option("--ls-budget", solve_ls_budget, "2-opt scan budget (-1 = run to local optimum)");
    solve->add_option("--seed", solve_seed, "recorded seed (solving is deterministic)");
    solve->add_option("--workers", solve_workers, "worker count (greedy decoding is single-threaded)");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "compare algorithms on one shared instance");
    std::string bench_instance, bench_family = "euclidean", bench_algos = "drlmoa,nsga2,moead";
    std::string bench_bank, bench_out;
    int bench_n = 40, bench_workers = 1;
    BenchOptions opt;
    bench->add_option("--instance", bench_instance, "instance JSON (otherwise generated)");
    bench->add_option("--family", bench_family, "generated family");
    bench->add_option("--n", bench_n, "generated city count");
    bench->add_option("--algos", bench_algos, "comma list: drlmoa,drlmoa-ls,nsga2,moead,mogls");
    bench->add_option("--bank", bench_bank, "model bank directory (for drlmoa rows)");
    bench->add_option("--out", bench_out, "output directory")->required();
    bench->add_option("--seed", opt.seed, "rng seed");
    bench->add_option("--workers", bench_workers, "parallel benchmark cells");
    bench->add_option("--nsga2-pop", opt.nsga2_pop, "NSGA-II population");
    bench->add_option("--nsga2-iters", opt.nsga2_iters, "NSGA-II iterations");
    bench->add_option("--moead-n", opt.moead_n, "MOEA/D subproblems");
    bench->add_option("--moead-iters", opt.moead_iters, "MOEA/D iterations");
    bench->add_option("--moead-tnbr", opt.moead_tnbr, "MOEA/D neighborhood size");
    bench->add_option("--mogls-gens", opt.mogls_gens, "MOGLS generations");
    bench->add_option("--mogls-nls", opt.mogls_nls, "MOGLS 2-opt scan budget N_LS");
    bench->add_option("--mogls-init", opt.mogls_init, "MOGLS initial solutions");
    bench->add_option("--mogls-temp", opt.mogls_temp, "MOGLS temporary population");
    bench->add_option("--p-mut", opt.p_mut, "mutation probability for the evolutionary baselines");
    bench->add_option("--ls-budget", opt.ls_budget, "drlmoa-ls 2-opt budget (-1 = local optimum)");

    // hv
    auto* hv = app.add_subcommand("hv", "hypervolume of a stored front");
    std::string hv_front, hv_ref;
    std::uint64_t hv_seed = 1;
    hv->add_option("--front", hv_front, "front record JSON")->required();
    hv->add_option("--ref", hv_ref, "reference point a,b,... (default: stored reference)");
    hv->add_option("--seed", hv_seed, "unused; accepted for interface uniformity");

    // export
    auto* exp = app.add_subcommand("export", "export a front record");
    std::string exp_front, exp_format = "csv", exp_out;
    std::uint64_t exp_seed = 1;
    exp->add_option("--front", exp_front, "front record JSON")->required();
    exp->add_option("--format", exp_format, "csv | json");
    exp->add_option("--out", exp_out, "output path")->required();
    exp->add_option("--seed", exp_seed, "unused; accepted for interface uniformity");

    // kroab
    auto* kro = app.add_subcommand("kroab", "compose a bi-objective instance from two TSPLIB files");
    std::string kro_a, kro_b, kro_out;
    std::uint64_t kro_seed = 1;
    kro->add_option("--a", kro_a, "first TSPLIB file (objective 1 coordinates)")->required();
    kro->add_option("--b", kro_b, "second TSPLIB file (objective 2 coordinates)")->required();
    kro->add_option("--out", kro_out, "output instance JSON")->required();
    kro->add_option("--seed", kro_seed, "unused; accepted for interface uniformity");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(gen)) return cmd_gen(gen_family, gen_n, gen_seed, gen_out);
        if (app.got_subcommand(train)) {
            tc.transfer = !no_transfer;
            return cmd_train(tc, train_out, train_log);
        }
        if (app.got_subcommand(solve))
            return cmd_solve(solve_bank, solve_instance, solve_out, solve_ls, solve_ls_budget, solve_seed);
        if (app.got_subcommand(bench))
            return cmd_benchmark(bench_instance, bench_family, bench_n, bench_algos, bench_bank,
                                 bench_out, opt, bench_workers);
        if (app.got_subcommand(hv)) return cmd_hv(hv_front, hv_ref);
        if (app.got_subcommand(exp)) return cmd_export(exp_front, exp_format, exp_out);
        if (app.got_subcommand(kro)) return cmd_kroab(kro_a, kro_b, kro_out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace motsp
