"""Next-day direction forecasting with stacked denoising autoencoders, SVM and BPNN."""

__version__ = "0.1.0"
