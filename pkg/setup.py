from setuptools import find_packages, setup

LATEST_VERSION = "0.1.0"

exclude_packages = [
    "tests",
    "tests.*",
    "evals",
    "evals.*",
]

with open(r"README.md", "r", encoding="utf-8") as f:
    long_description = f.read()

with open("requirements.txt", "r") as f:
    reqs = [line.strip() for line in f if line.strip() and not line.startswith("#")]

setup(
    name="ml-msda",
    version=LATEST_VERSION,
    description="Multi-source domain adaptation with guidance-centered mutual learning",
    package_dir={'ml_msda': 'ml_msda'},
    packages=find_packages(exclude=exclude_packages),
    package_data={'ml_msda.config.variables': ['*.json']},
    py_modules=['cli'],
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    classifiers=[
        "License :: OSI Approved :: MIT License",
        "Intended Audience :: Education",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires='>=3.11',
    install_requires=reqs,
    entry_points={'console_scripts': ['ml-msda=cli:main']},
)
