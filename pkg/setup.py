import setuptools

setuptools.setup(
    name="fdwpcn-mdp-tools",
    version="0.1.0",
    description="Average-reward MDP solver and experiment harness for full-duplex wireless powered communication networks",
    packages = setuptools.find_packages(exclude=["examples", "examples.*"]),
    install_requires=["numpy", "pandas", "scipy"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["wpcn-mdp=wpcn_mdp.process_experiments:main"]},
    python_requires='>=3.8',
)
