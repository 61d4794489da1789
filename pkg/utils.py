import numpy as np

from config import OUTPUT_CONFIG


def make_rng(seed, stream=0):
    """
    Creates a counter-based random stream

    Philox streams are reproducible across platforms; `stream` selects an
    independent sub-stream so suites drawing in a different order still get
    the same numbers.

    Args:
        seed (int): Base seed
        stream (int): Sub-stream index

    Returns:
        np.random.Generator: Random generator
    """
    bit_generator = np.random.Philox(key=int(seed))
    if stream:
        bit_generator = bit_generator.jumped(int(stream))
    return np.random.Generator(bit_generator)


def format_float(value, float_format=None):
    """
    Formats a float with the configured fixed format

    Args:
        value (float): Value to format
        float_format (str): printf-style format, defaults to OUTPUT_CONFIG

    Returns:
        str: Formatted value, "nan" for missing values
    """
    if value is None:
        return "nan"
    float_format = float_format or OUTPUT_CONFIG["float_format"]
    return float_format % float(value)


def format_vector(values, float_format=None):
    """
    Formats a vector as a bracketed, comma separated list

    Args:
        values (array-like): Vector components
        float_format (str): printf-style format

    Returns:
        str: Formatted vector
    """
    return "[" + ", ".join(format_float(v, float_format) for v in np.ravel(values)) + "]"


def random_sphere_points(rng, count, dim):
    """
    Draws uniformly distributed points on the unit sphere in R^dim

    Args:
        rng (np.random.Generator): Random stream
        count (int): Number of points
        dim (int): Ambient dimension n + 1

    Returns:
        np.ndarray: (count, dim) array of unit vectors
    """
    points = rng.standard_normal((count, dim))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def random_ball_points(rng, count, dim, max_radius=0.9):
    """
    Draws points uniformly in direction with radius uniform in [0, max_radius]

    Args:
        rng (np.random.Generator): Random stream
        count (int): Number of points
        dim (int): Ambient dimension n + 1
        max_radius (float): Largest allowed norm

    Returns:
        np.ndarray: (count, dim) array
    """
    directions = random_sphere_points(rng, count, dim)
    radii = max_radius * rng.random(count)
    return directions * radii[:, None]


def random_atom_masses(rng, count, max_mass=0.45):
    """
    Draws positive masses summing to one with every mass below max_mass

    Args:
        rng (np.random.Generator): Random stream
        count (int): Number of atoms, at least 3
        max_mass (float): Upper bound on each mass

    Returns:
        np.ndarray: Masses
    """
    while True:
        masses = rng.dirichlet(np.ones(count))
        if masses.max() < max_mass:
            return masses
