# SCM model package
