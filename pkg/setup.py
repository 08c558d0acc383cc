from setuptools import setup, find_packages

setup(
    name = "mtemsim",
    version = "0.1.0",
    packages = find_packages(),
    scripts = ['scripts/mtemsim'],

    install_requires = [
        'numpy>=1.17',
        'scipy>=1.3',
        'pystache>=0.5',
        'PyYAML>=3.11',
        ],

    package_data = {
        'mtemsim': ['data/*.json', 'data/*.mustache'],
    },

    # metadata for upload to PyPI
    description = "Modified truncated Euler-Maruyama simulation and "
                  "stability checks for SDEs with superlinear coefficients",
    license = "MIT",
    keywords = "stochastic differential equations, numerical stability",

)
