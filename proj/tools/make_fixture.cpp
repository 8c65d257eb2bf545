// Writes a reference architecture with synthetic weights as a container.
#include <CLI11.hpp>
#include <iostream>

#include "fprune/container.hpp"
#include "fprune/error.hpp"
#include "fprune/zoo.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate model fixtures"};
  std::string model = "resnet56", output, format = "fpwt";
  fprune::zoo::WeightStyle style;
  int classes = 10;
  app.add_option("--model", model, "resnet20|resnet32|resnet56|resnet110|vgg16-cifar|vgg16-imagenet|chain");
  app.add_option("--output", output, "Output path")->required();
  app.add_option("--format", format)->check(CLI::IsMember({"fpwt", "json"}));
  app.add_option("--seed", style.seed);
  app.add_option("--spread", style.spread, "Within-prototype noise scale");
  app.add_option("--classes", classes);
  CLI11_PARSE(app, argc, argv);

  try {
    fprune::ModelSnapshot snap;
    if (model.starts_with("resnet")) {
      snap = fprune::zoo::resnet_cifar(std::stoi(model.substr(6)), classes, style);
    } else if (model == "vgg16-cifar") {
      snap = fprune::zoo::vgg16_cifar(classes, style);
    } else if (model == "vgg16-imagenet") {
      snap = fprune::zoo::vgg16_imagenet(style);
    } else if (model == "chain") {
      snap = fprune::zoo::conv_chain({8, 16, 16}, 3, 8, classes, style);
    } else {
      std::cerr << "unknown model '" << model << "'\n";
      return 2;
    }
    fprune::save_snapshot(snap, output, format == "json" ? fprune::ContainerFormat::json
                                                         : fprune::ContainerFormat::fpwt);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
