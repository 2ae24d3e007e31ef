// Acceptance runner: executes the built-in verification criteria and prints
// one PASS/FAIL line per criterion.  Exit status 1 if any selected criterion
// fails.  Used both standalone and via the per-criterion ctest entries.

#include <cstring>
#include <iostream>
#include <string>

#include "bvflow/verify.hpp"

int main(int argc, char** argv) {
    bvflow::VerifyOptions opt;
    int criterion = 0; // 0 = all

    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        auto next = [&](const char* name) -> std::string {
            if (i + 1 >= argc) {
                std::cerr << name << " needs a value\n";
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--criterion") {
            criterion = std::stoi(next("--criterion"));
        } else if (arg == "--threads") {
            opt.threads = std::stoi(next("--threads"));
        } else if (arg == "--seed") {
            opt.seed = std::stoull(next("--seed"));
        } else if (arg == "--quick") {
            opt.quick = true;
        } else {
            std::cerr << "usage: acceptance [--criterion N] [--quick] [--threads N] [--seed S]\n";
            return 2;
        }
    }

    int failed = 0;
    for (int id : bvflow::criterion_ids()) {
        if (criterion != 0 && id != criterion) continue;
        bvflow::CriterionResult r = bvflow::run_criterion(id, opt);
        std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name
                  << "): " << r.details << std::endl;
        if (!r.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
