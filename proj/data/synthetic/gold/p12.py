def main():
    things = ["planet", "garden", "apple"]
    for thing in things:
        if len(thing) > 5:
            print(thing.upper())
    print(len(things))

if __name__ == "__main__":
    main()
