import numpy as np

# fixed tags; changing one changes every derived stream of that component
COMPONENT_TAGS = {
    "model": 1,
    "data": 2,
    "stream.lang1": 3,
    "stream.lang2": 4,
    "corruption": 5,
    "dropout": 6,
    "evaluation": 7,
}


def derive_seed(seed: int, component: str) -> int:
    """Deterministic sub-seed of the run seed for one component."""
    try:
        tag = COMPONENT_TAGS[component]
    except KeyError:
        raise KeyError(f"unknown seed component {component!r}") from None
    return int(np.random.SeedSequence([int(seed), tag]).generate_state(1)[0])


def component_rng(seed: int, component: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, component))
