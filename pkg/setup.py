# ================================
# 📦 Basic setup.py for Packaging
# ================================
from typing import List

from setuptools import find_packages, setup


# ================================
# 🔧 Utility function to parse requirements
# ================================
def get_requirements() -> List[str]:
    """
    Reads `requirements.txt` and returns the dependency list,
    skipping comments, blank lines and "-e .".
    """
    requirement_lst: List[str] = []
    try:
        with open("requirements.txt", "r") as file:
            for line in file.readlines():
                requirement = line.split("#", 1)[0].strip()
                if requirement and requirement != "-e .":
                    requirement_lst.append(requirement)
    except FileNotFoundError:
        print("⚠️ requirements.txt not found")
    return requirement_lst


# ================================
# 📦 Setup Configuration
# ================================
setup(
    name="activity_sos",
    version="1.0.0",
    description="Executable structural operational semantics for UML activity diagrams",
    packages=find_packages(exclude=("tests", "tests.*")),
    package_data={"activity_sos": ["data_schema/*.yaml"]},
    install_requires=get_requirements(),
    entry_points={"console_scripts": ["activity-sos=activity_sos.pipeline.cli:main"]},
)
