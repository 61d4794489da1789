import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

ENV_PREFIX = "DEEXT_"


def _env(name, default, cast=float):
    """
    Reads a DEEXT_-prefixed environment override

    Args:
        name (str): Variable name without the prefix
        default: Value used when the variable is unset or empty
        cast (callable): Conversion applied to the raw string

    Returns:
        The converted value or the default
    """
    raw = os.getenv(ENV_PREFIX + name, "")
    if raw.strip() == "":
        return default
    return cast(raw)


# Geometry tolerances
GEOMETRY_CONFIG = {
    "sphere_tolerance": 1e-12,     # |x| - 1 allowed for sphere points given outside the ball
    "ball_margin": 1e-15,          # ball points need |x| < 1 - margin
    "orthogonality_tolerance": 1e-12,
    "gram_schmidt_threshold": 1e-12,
    "complex_step": 1e-30,
}

# Quadrature and measure settings
QUADRATURE_CONFIG = {
    "default_level": {1: 8, 2: 32},
    "level": _env("LEVEL", None, int),     # replaces default_level when set
    "monte_carlo_level": 5,
    "min_level": 3,
    "max_level": {1: 20, 2: 512},
    "monte_carlo_max_level": 10,
    "r_max": _env("R_MAX", 0.999),          # kernel-form integration cap
    "atom_merge_tolerance": 1e-12,
    "mass_tolerance": 1e-10,
    "kernel_mass_tolerance": 1e-2,         # quadrature error allowed on the raw Poisson kernel
    "weight_tolerance": 1e-13,
    "monte_carlo_seed": 0,
}

# Barycenter solver
SOLVER_CONFIG = {
    "tol": _env("TOL", 1e-12),
    "max_iters": _env("MAX_ITERS", 200, int),
    "clamp": _env("CLAMP", 0.5),
    "max_halvings": 30,
    "initial_radius_cap": 0.9,
    "flow_tolerance": 1e-13,
    "flow_chunk": 50.0,
    "flow_max_chunks": 60,
}

# Douady-Earle extension evaluation
EXTENSION_CONFIG = {
    "cache_quantum": 1e-13,
    "fd_step": 1e-6,
    "singular_condition": 1e12,
    "atomic_flag_ratio": 10.0,      # merged cluster mass / largest node weight
    "singularity_exclusion": 1e-6,  # chordal distance kept from essential singularities
    "rank_tolerance": 1e-8,
}

# Structure checks and conjecture scans
EXPERIMENT_CONFIG = {
    "disc_grid_side": 21,
    "disc_grid_radius": 0.9,
    "hemisphere_probes": 50,
    "vertical_probes": 9,
    "axis_samples": 12,
    "inner_probes": 30,
    "inner_probe_radius": 0.6,
    "geodesic_disc_ts": (0.5, 0.7, 0.9),
    "radial_samples": (0.2, 0.4, 0.6, 0.8, 0.9, 0.95),
    "tolerances": {
        "disc_invariance": 1e-8,
        "vertical_parallel": 1e-6,
        "equivariance": 1e-8,
        "radial_form": 1e-7,
        "geodesic_disc": 1e-6,
        "inner_recovery": 1e-7,
        "origin": 1e-9,
    },
}

# Property suites behind the `check` command
SUITE_CONFIG = {
    "seed": _env("SEED", 20100, int),
    "suites": ["naturality", "barycenter", "extension", "blaschke", "inner", "jacobian"],
    "naturality_pairs": 50,
    "barycenter_samples": 20,
    "multistarts": 10,
    "extension_probes": 10,
    "extension_points": 100,
    "identity_probes": 20,
    "flow_measures": 20,
    "stability_measures": 50,
    "jacobian_pairs": 30,
    "direction_measures": 1000,
    "blaschke_maps": 5,
}

# Output and parallelism
OUTPUT_CONFIG = {
    "float_format": "%.15e",
    "workers": _env("WORKERS", os.cpu_count() or 1, int),
    "output_dir": _env("OUTPUT_DIR", "output", str),
}

# Mesh figures
CHART_CONFIG = {
    "height": 700,
    "template": "plotly_white",
    "colorscale": "Viridis",
    "sphere_color": "#4A90E2",
    "sphere_opacity": 0.08,
}

# Logging
LOG_CONFIG = {
    "level": _env("LOG_LEVEL", "WARNING", str),
    "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
}

# Process exit codes used by the CLI
EXIT_CODES = {
    "ok": 0,
    "parse_error": 1,
    "inadmissible": 2,
    "no_convergence": 3,
    "check_failed": 4,
    "evaluation_error": 5,
}
