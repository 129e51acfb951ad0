from setuptools import setup, find_packages
from pathlib    import Path

base_dir     = Path(__file__).parent.resolve()
version_file = base_dir / "lib/ebitsim/__version__.py"
readme_file  = base_dir / "README.md"

# Eval the version file to get __version__; avoids importing our own package
with version_file.open() as f:
    exec(f.read())

# Get the long description from the README file
with readme_file.open(encoding = "utf-8") as f:
    long_description = f.read()

setup(
    name = "ebitsim",
    version = __version__,

    packages = find_packages("lib"),
    package_dir = {"": "lib"},
    package_data = {"": ["data/*"]},

    description = "Simulate atom-atom entanglement from post-selected photon detection",
    long_description = long_description,
    long_description_content_type = "text/markdown",

    classifiers = [
        "Development Status :: 4 - Beta",

        # This is a CLI
        "Environment :: Console",

        # This is for physicists and the developers who support them
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",

        # Python ≥ 3.8 only
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
    ],

    # Install an ebitsim program which calls ebitsim.cli.cli()
    #   https://setuptools.readthedocs.io/en/latest/setuptools.html#automatic-script-creation
    entry_points = {
        "console_scripts": [
            "ebitsim = ebitsim.cli:cli",
        ],
    },

    python_requires = ">=3.8",

    install_requires = [
        "click >=7.0",
        "fsspec",
        "numpy >=1.17,<2",
        "pandas >=1.0.1,<2",
        "pyyaml",
        "scipy >=1.4",

        # We use pkg_resources, which (confusingly) is provided by setuptools.
        # setuptools is nearly ever-present, but it can be missing!
        "setuptools",
    ],

    extras_require = {
        "dev": [
            "mypy",
            "pytest",
        ],
    },
)
