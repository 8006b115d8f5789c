"""
Setup script for the crowdprop package
Enables editable installation: pip install -e .
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README for long description
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text() if readme_file.exists() else ""

setup(
    name="ds-crowdprop",
    version="0.1.0",
    description="Crowd quality scores propagated onto distant-supervision relation corpora",
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires=">=3.8",
    packages=find_packages(exclude=["tests", "tests.*", "scripts"]),
    py_modules=["config"],
    package_data={"": ["resources/*.txt"]},
    install_requires=[
        "numpy>=1.26.4",
        "scipy>=1.10.0",
        "scikit-learn>=1.3.0",
        "tqdm>=4.66.0",
        "pyyaml>=6.0.0",
    ],
    extras_require={
        "test": [
            "pytest>=7.4.0",
            "pytest-timeout>=2.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "crowdprop=modules.cli:main",
        ],
    },
)
