#pragma once

#include <memory>
#include <string>

#include "fdqn/envs/cartpole.hpp"
#include "fdqn/envs/chain.hpp"
#include "fdqn/envs/dino.hpp"
#include "fdqn/envs/env.hpp"
#include "fdqn/envs/mountain_car.hpp"

namespace fdqn {

inline std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "cartpole") return std::make_unique<CartPoleEnv>();
    if (name == "mountaincar") return std::make_unique<MountainCarEnv>();
    if (name == "dino") return std::make_unique<DinoEnv>();
    if (name == "chain") return std::make_unique<ChainEnv>();
    throw ConfigError("unknown environment '" + name + "' (known: cartpole, mountaincar, dino, chain)");
}

}  // namespace fdqn
