from setuptools import setup

setup(
        name='hardywarp',
        version='0.1.0',
        description='Hardy-space Dirichlet solver and harmonic image warping',
        license='AGPL-3.0-or-later',
        packages=['hardy', 'hwarp'],
        python_requires='>=3.7',
        install_requires=[
            'numpy',
            'scipy',
            'ujson',
            ],
        extras_require={
            'plot': ['matplotlib'],
            'test': ['pytest', 'hypothesis', 'matplotlib'],
            },
        scripts=['hardywarp'],
        )
