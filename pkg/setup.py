from setuptools import setup, find_packages

with open('README.md', 'r', encoding='utf-8') as f:
    long_description = f.read()

packages = find_packages(include=('latentsat', 'latentsat.*'))

setup(
    name='latentsat',
    version='0.1.0',
    license='MIT License',
    author='latentsat developers',
    description='Onboard latent-space change detection and few-shot '
                'classification for multispectral satellite tiles.',
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=packages,
    package_data={
        '': ['*.pyi', 'py.typed'],
    },
    install_requires=['numpy>=1.20'],
    entry_points={
        'console_scripts': ['latentsat=latentsat.command:main'],
    },
    python_requires='>=3.8',
    platforms='any',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: GIS',
        'Topic :: Scientific/Engineering :: Image Recognition',
        'Typing :: Typed',
    ],
)
