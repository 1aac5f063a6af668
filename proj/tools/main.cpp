#include "dpgfem/convergence.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const auto cfg = dpgfem::parse_config(args);
        if (!cfg) return 0; // help requested
        const auto result = dpgfem::run_convergence(*cfg, &std::cout);
        if (!result.rates.empty()) {
            const auto& last = result.rates.back();
            auto show = [](const std::optional<double>& r) {
                return r ? std::to_string(*r) : std::string("-");
            };
            std::cout << "final-pair EOC: u1=" << show(last.u1)
                      << " sigma=" << show(last.sigma) << " u2=" << show(last.u2)
                      << " uhat=" << show(last.uhat) << " sighat=" << show(last.sighat)
                      << " energy=" << show(last.energy) << " jump=" << show(last.jump)
                      << "\n";
        }
        std::cout << "wrote " << cfg->out_csv << " and " << cfg->jump_out << "\n";
        return 0;
    } catch (const dpgfem::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
