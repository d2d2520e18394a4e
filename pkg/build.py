from distutils.extension import Extension
from Cython.Build import cythonize

extensions = [
    Extension("pvasym.ellipkit", ["pvasym/ellipkit.py"]),
    Extension("pvasym.painleve_ode", ["pvasym/painleve_ode.py"]),
]


def build(setup_kwargs):
    setup_kwargs.update({
        'ext_modules':
        cythonize(extensions,
                  compiler_directives={
                      'language_level': "3",
                      'embedsignature': True,
                      'annotation_typing': False
                  })
    })
