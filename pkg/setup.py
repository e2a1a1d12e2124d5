from setuptools import setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="urysohn-toolkit",
    version="0.1.0",
    description="Exact finite constructions around the rational Urysohn metric space",
    long_description=long_description,
    long_description_content_type="text/markdown",
    py_modules=["amalgam", "builder", "cli", "config", "core", "dap_harness", "generator", "main"],
    packages=["utils"],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.25.2",
        "python-dotenv>=1.0.0",
        "click>=8.0.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "hypothesis>=6.0.0",
            "black>=22.0.0",
            "isort>=5.10.0",
            "mypy>=0.910",
            "pylint>=2.12.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "urysohn-toolkit=main:main",
        ],
    },
    include_package_data=True,
    package_data={
        "": ["*.md", "*.txt"],
    },
)
