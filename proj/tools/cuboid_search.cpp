#include <atomic>
#include <csignal>
#include <iostream>

#include "cuboid/cli.hpp"

namespace {
std::atomic<bool> g_interrupt{false};
void on_signal(int) { g_interrupt.store(true); }
} // namespace

int main(int argc, char** argv)
{
	std::signal(SIGINT, on_signal);
	std::signal(SIGTERM, on_signal);
	return cuboid::cli::run(argc, argv, std::cout, std::cerr, &g_interrupt);
}
