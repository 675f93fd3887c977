#pragma once

#include <string>
#include <utility>
#include <vector>

namespace testing_support {

// Collected pairs that must survive both filters.
const std::vector<std::pair<std::string, std::string>> kCollected = {
    {"Ueberraschungen", "Überraschungen"}, {"Medicinerei", "Medizinerei"},
    {"practicieren", "praktizieren"},     {"Caffeegeschirr", "Kaffeegeschirr"},
    {"Cigarettentasche", "Zigarettentasche"}, {"Hausflurthür", "Hausflurtür"},
    {"Nachtheil", "Nachteil"},            {"Legirung", "Legierung"},
    {"legirt", "legiert"},                {"Gratulire", "Gratuliere"},
    {"nothwendigerweise", "notwendigerweise"}, {"adressirt", "adressiert"},
    {"cuvertiert", "kuvertiert"},         {"todtgeboren", "totgeboren"}};

const std::vector<std::pair<std::string, std::string>> kLevenshteinExcluded = {
    {"Wohlhäbige", "Wohlhabende"}, {"Verlaubst", "Laubest"}, {"Thu’s", "tue es"}, {"daß’s", "dass es"},
    {"hoamgangen", "heimgegangen"}, {"Zen", "Zähne"}, {"veracht’", "Acht"}};

const std::vector<std::pair<std::string, std::string>> kGestaltExcluded = {
    {"Hizt", "Jetzt"}, {"nachi", "nage"}, {"itz", "Jets"}, {"Creyß", "Kreis"},
    {"Flick", "Flügge"}, {"Vehd", "Fett"}, {"dy", "die"}};

}  // namespace testing_support
